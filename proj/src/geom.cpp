#include "lpi/geom.hpp"

#include "lpi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace lpi {

int PointCloud::segment_count() const {
  if (segment_labels.empty()) return 0;
  return *std::max_element(segment_labels.begin(), segment_labels.end()) + 1;
}

void PointCloud::validate() const {
  if (points.size() < 4) {
    throw InvalidArgument("point cloud needs at least 4 points, got " +
                          std::to_string(points.size()));
  }
  for (const auto& p : points) {
    if (!p.allFinite()) throw InvalidArgument("point cloud contains non-finite coordinates");
  }
  if (segment_labels.empty()) return;
  if (segment_labels.size() != points.size()) {
    throw InvalidArgument("segment label count does not match point count");
  }
  const int s = segment_count();
  std::vector<bool> seen(static_cast<std::size_t>(std::max(s, 0)), false);
  for (int label : segment_labels) {
    if (label < 0) throw InvalidArgument("negative segment label");
    seen[static_cast<std::size_t>(label)] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw InvalidArgument("segment labels must form a contiguous range 0..S-1");
  }
}

Box bounding_box(std::span<const Vec3> points) {
  Box box;
  if (points.empty()) return box;
  box.lo = box.hi = points.front();
  for (const auto& p : points) {
    box.lo = box.lo.cwiseMin(p);
    box.hi = box.hi.cwiseMax(p);
  }
  return box;
}

std::pair<PointCloud, Normalization> normalize(const PointCloud& cloud) {
  cloud.validate();
  const Box box = bounding_box(cloud.points);
  const double extent = box.extent().maxCoeff();
  if (!(extent > 0.0)) throw DegenerateInput("all points are identical");

  Vec3 centroid = Vec3::Zero();
  for (const auto& p : cloud.points) centroid += p;
  centroid /= static_cast<double>(cloud.size());

  Normalization norm;
  norm.scale = extent;
  norm.offset = centroid;
  // Exact identity for clouds that are already normalized.
  if (std::abs(extent - 1.0) <= 1e-12 && centroid.norm() <= 1e-12) norm = Normalization{};

  PointCloud out;
  out.segment_labels = cloud.segment_labels;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) out.points.push_back(norm.apply(p));
  return {std::move(out), norm};
}

RegionCenters farthest_point_sample(std::span<const Vec3> points, std::size_t count,
                                    std::uint64_t seed) {
  const std::size_t n = points.size();
  if (count < 1 || count > n) {
    throw InvalidArgument("farthest point sampling needs 1 <= I <= N (I=" + std::to_string(count) +
                          ", N=" + std::to_string(n) + ")");
  }

  std::size_t start = 0;
  if (seed == 0) {
    Vec3 centroid = Vec3::Zero();
    for (const auto& p : points) centroid += p;
    centroid /= static_cast<double>(n);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double d = (points[i] - centroid).squaredNorm();
      if (d < best) {
        best = d;
        start = i;
      }
    }
  } else {
    start = static_cast<std::size_t>(seed % n);
  }

  RegionCenters out;
  out.centers.reserve(count);
  out.source_indices.reserve(count);
  std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
  std::size_t last = start;
  for (std::size_t k = 0; k < count; ++k) {
    out.source_indices.push_back(last);
    out.centers.push_back(points[last]);
    if (k + 1 == count) break;
    std::size_t next = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = (points[i] - points[last]).squaredNorm();
      if (d < min_d2[i]) min_d2[i] = d;
      if (min_d2[i] > best) {
        best = min_d2[i];
        next = i;
      }
    }
    if (best <= 0.0) {
      throw InvalidArgument("cloud has fewer than " + std::to_string(count) + " distinct points");
    }
    last = next;
  }
  return out;
}

}  // namespace lpi
