#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace lpi {

using Vec3 = Eigen::Vector3d;

/// Surface samples of a single shape, optionally carrying a per-point segment id.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<int> segment_labels;  // empty, or one label per point in 0..S-1

  std::size_t size() const { return points.size(); }
  bool has_labels() const { return !segment_labels.empty(); }
  /// Number of segments S; 0 when unlabeled.
  int segment_count() const;

  /// Throws InvalidArgument when the cloud violates its invariants
  /// (fewer than 4 points, non-finite coordinates, label count or range mismatch).
  void validate() const;
};

/// Maps original coordinates into the normalized frame: p' = (p - offset) / scale.
struct Normalization {
  double scale = 1.0;
  Vec3 offset = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return (p - offset) / scale; }
  Vec3 invert(const Vec3& p) const { return p * scale + offset; }

  bool operator==(const Normalization&) const = default;
};

/// Centers the cloud's centroid at the origin and scales its largest axis extent to 1.
/// Throws DegenerateInput when every point is identical.
std::pair<PointCloud, Normalization> normalize(const PointCloud& cloud);

/// I region centers drawn from a cloud. A part is identified with its center index.
struct RegionCenters {
  std::vector<Vec3> centers;
  std::vector<std::size_t> source_indices;

  std::size_t size() const { return centers.size(); }
};

/// Greedy farthest point sampling.
///
/// The first center is the point nearest the centroid when `seed == 0`, and
/// point `seed mod N` otherwise. Each later center maximizes the minimum
/// distance to the centers already chosen; ties go to the lowest index.
RegionCenters farthest_point_sample(std::span<const Vec3> points, std::size_t count,
                                    std::uint64_t seed);

inline RegionCenters farthest_point_sample(const PointCloud& cloud, std::size_t count,
                                           std::uint64_t seed) {
  return farthest_point_sample(std::span<const Vec3>(cloud.points), count, seed);
}

/// Axis-aligned bounding box of a point set.
struct Box {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  Vec3 extent() const { return hi - lo; }
};

Box bounding_box(std::span<const Vec3> points);

}  // namespace lpi
