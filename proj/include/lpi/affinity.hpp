#pragma once

#include "lpi/geodesic.hpp"
#include "lpi/geom.hpp"
#include "lpi/spatial_index.hpp"
#include "lpi/tensor.hpp"

#include <Eigen/Core>

#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace lpi {

enum class AffinityMode { Euclidean, Intrinsic, Semantic, Average, Nearest };

std::string_view to_string(AffinityMode mode);
/// Accepts the lower-case names used on the command line; throws InvalidArgument otherwise.
AffinityMode parse_affinity_mode(std::string_view name);

struct AffinityConfig {
  AffinityMode mode = AffinityMode::Euclidean;
  double sigma = 1.0;
  double semantic_own_weight = 0.8;

  /// `segments` is the label count S of the cloud (only checked in semantic mode).
  void validate(int segments = 0) const;

  bool operator==(const AffinityConfig&) const = default;
};

/// Non-negative per-region weights summing to one.
using AffinityVector = Eigen::VectorXd;

/// ||q - r_i|| for every center.
Eigen::VectorXd euclid_dist(const Vec3& q, const RegionCenters& centers);

/// ||q - nn(q, M)|| + G(nn(q, M), r_i) for every center, where the index is built
/// over the same cloud the table was computed on.
Eigen::VectorXd intrinsic_dist(const Vec3& q, const SpatialIndex& index, const GeodesicTable& table);

/// a_i = exp(-d_i / sigma) / sum_j exp(-d_j / sigma), evaluated after shifting by min(d).
AffinityVector gaussian_normalize(const Eigen::VectorXd& d, double sigma);

/// Weight `own_weight` on the label of q's nearest labeled point, the rest spread
/// evenly over the other S - 1 segments.
AffinityVector semantic_affinity(const Vec3& q, const PointCloud& labeled, const SpatialIndex& index,
                                 int segments, double own_weight);

/// Average: uniform 1/I. Nearest: one-hot at the closest center (lowest index on ties).
AffinityVector ablation_affinity(const Vec3& q, const RegionCenters& centers, AffinityMode mode);

/// One representative center per segment: the segment point closest to the segment centroid.
RegionCenters segment_centers(const PointCloud& labeled);

/// Everything needed to evaluate affinities for arbitrary queries under one
/// configuration. Training and reconstruction go through the same instance type.
class AffinityField {
 public:
  /// Builds the spatial index and, in intrinsic mode, the geodesic table.
  AffinityField(AffinityConfig config, RegionCenters centers, PointCloud cloud, std::size_t geodesic_knn);

  const AffinityConfig& config() const { return config_; }
  const RegionCenters& centers() const { return centers_; }
  const PointCloud& cloud() const { return cloud_; }
  const SpatialIndex& index() const { return index_; }
  const std::optional<GeodesicTable>& geodesics() const { return table_; }

  /// Length of every affinity vector (I, or S in semantic mode).
  std::size_t code_count() const { return centers_.size(); }

  AffinityVector affinity(const Vec3& q) const;
  /// Row r holds the affinity of queries[r].
  Tensor affinities(std::span<const Vec3> queries) const;

  /// Region owning q: nearest center under the mode's metric (Euclidean for
  /// Euclidean/Average/Nearest, intrinsic distance for Intrinsic), or the
  /// segment label of the nearest labeled point in semantic mode.
  std::size_t region_of(const Vec3& q) const;

 private:
  AffinityConfig config_;
  RegionCenters centers_;
  PointCloud cloud_;
  SpatialIndex index_;
  std::optional<GeodesicTable> table_;
};

}  // namespace lpi
