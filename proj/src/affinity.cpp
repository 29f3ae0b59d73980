#include "lpi/affinity.hpp"

#include "lpi/errors.hpp"
#include "lpi/parallel.hpp"

#include <cmath>
#include <limits>

namespace lpi {

std::string_view to_string(AffinityMode mode) {
  switch (mode) {
    case AffinityMode::Euclidean: return "euclidean";
    case AffinityMode::Intrinsic: return "intrinsic";
    case AffinityMode::Semantic: return "semantic";
    case AffinityMode::Average: return "average";
    case AffinityMode::Nearest: return "nearest";
  }
  return "unknown";
}

AffinityMode parse_affinity_mode(std::string_view name) {
  for (auto mode : {AffinityMode::Euclidean, AffinityMode::Intrinsic, AffinityMode::Semantic,
                    AffinityMode::Average, AffinityMode::Nearest}) {
    if (to_string(mode) == name) return mode;
  }
  throw InvalidArgument("unknown affinity mode '" + std::string(name) + "'");
}

void AffinityConfig::validate(int segments) const {
  if ((mode == AffinityMode::Euclidean || mode == AffinityMode::Intrinsic) && !(sigma > 0.0)) {
    throw InvalidArgument("sigma must be positive");
  }
  if (mode == AffinityMode::Semantic) {
    if (segments < 2) throw InvalidArgument("semantic affinity needs at least 2 segments");
    if (!(semantic_own_weight > 1.0 / segments && semantic_own_weight < 1.0)) {
      throw InvalidArgument("semantic own weight must lie in (1/S, 1)");
    }
  }
}

Eigen::VectorXd euclid_dist(const Vec3& q, const RegionCenters& centers) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(centers.size()));
  for (std::size_t i = 0; i < centers.size(); ++i) d[static_cast<Eigen::Index>(i)] = (q - centers.centers[i]).norm();
  return d;
}

Eigen::VectorXd intrinsic_dist(const Vec3& q, const SpatialIndex& index, const GeodesicTable& table) {
  const Neighbor nn = index.nearest(q);
  Eigen::VectorXd d(static_cast<Eigen::Index>(table.centers));
  for (std::size_t i = 0; i < table.centers; ++i) {
    d[static_cast<Eigen::Index>(i)] = nn.distance + table.at(i, nn.index);
  }
  return d;
}

AffinityVector gaussian_normalize(const Eigen::VectorXd& d, double sigma) {
  if (d.size() == 0) return AffinityVector();
  const double shift = d.minCoeff();
  AffinityVector a = (-(d.array() - shift) / sigma).exp().matrix();
  return a / a.sum();
}

AffinityVector semantic_affinity(const Vec3& q, const PointCloud& labeled, const SpatialIndex& index,
                                 int segments, double own_weight) {
  if (segments < 2) throw InvalidArgument("semantic affinity needs at least 2 segments");
  if (!labeled.has_labels()) throw InvalidArgument("semantic affinity needs a labeled cloud");
  const int label = labeled.segment_labels[index.nearest(q).index];
  AffinityVector a = AffinityVector::Constant(segments, (1.0 - own_weight) / (segments - 1));
  a[label] = own_weight;
  return a;
}

AffinityVector ablation_affinity(const Vec3& q, const RegionCenters& centers, AffinityMode mode) {
  const auto n = static_cast<Eigen::Index>(centers.size());
  if (n == 0) throw InvalidArgument("ablation affinity needs at least one center");
  if (mode == AffinityMode::Average) return AffinityVector::Constant(n, 1.0 / static_cast<double>(n));
  if (mode != AffinityMode::Nearest) throw InvalidArgument("ablation affinity supports average/nearest only");
  Eigen::Index best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d2 = (q - centers.centers[static_cast<std::size_t>(i)]).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  AffinityVector a = AffinityVector::Zero(n);
  a[best] = 1.0;
  return a;
}

RegionCenters segment_centers(const PointCloud& labeled) {
  const int s = labeled.segment_count();
  std::vector<Vec3> centroid(static_cast<std::size_t>(s), Vec3::Zero());
  std::vector<std::size_t> count(static_cast<std::size_t>(s), 0);
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    const auto l = static_cast<std::size_t>(labeled.segment_labels[i]);
    centroid[l] += labeled.points[i];
    ++count[l];
  }
  RegionCenters out;
  out.centers.resize(static_cast<std::size_t>(s));
  out.source_indices.resize(static_cast<std::size_t>(s));
  std::vector<double> best(static_cast<std::size_t>(s), std::numeric_limits<double>::infinity());
  for (std::size_t l = 0; l < centroid.size(); ++l) centroid[l] /= static_cast<double>(count[l]);
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    const auto l = static_cast<std::size_t>(labeled.segment_labels[i]);
    const double d = (labeled.points[i] - centroid[l]).squaredNorm();
    if (d < best[l]) {
      best[l] = d;
      out.centers[l] = labeled.points[i];
      out.source_indices[l] = i;
    }
  }
  return out;
}

AffinityField::AffinityField(AffinityConfig config, RegionCenters centers, PointCloud cloud,
                             std::size_t geodesic_knn)
    : config_(config), centers_(std::move(centers)), cloud_(std::move(cloud)), index_(cloud_.points) {
  if (centers_.size() == 0) throw InvalidArgument("affinity field needs at least one center");
  config_.validate(cloud_.segment_count());
  if (config_.mode == AffinityMode::Semantic && static_cast<int>(centers_.size()) != cloud_.segment_count()) {
    throw InvalidArgument("semantic mode needs one center per segment");
  }
  if (config_.mode == AffinityMode::Intrinsic) {
    table_ = build_geodesic_table(cloud_, centers_, geodesic_knn);
  }
}

AffinityVector AffinityField::affinity(const Vec3& q) const {
  switch (config_.mode) {
    case AffinityMode::Euclidean: return gaussian_normalize(euclid_dist(q, centers_), config_.sigma);
    case AffinityMode::Intrinsic: return gaussian_normalize(intrinsic_dist(q, index_, *table_), config_.sigma);
    case AffinityMode::Semantic:
      return semantic_affinity(q, cloud_, index_, cloud_.segment_count(), config_.semantic_own_weight);
    case AffinityMode::Average:
    case AffinityMode::Nearest: return ablation_affinity(q, centers_, config_.mode);
  }
  return {};
}

Tensor AffinityField::affinities(std::span<const Vec3> queries) const {
  Tensor out(static_cast<Eigen::Index>(queries.size()), static_cast<Eigen::Index>(code_count()));
  parallel_for(queries.size(), 1024, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      out.row(static_cast<Eigen::Index>(r)) = affinity(queries[r]).transpose();
    }
  });
  return out;
}

std::size_t AffinityField::region_of(const Vec3& q) const {
  if (config_.mode == AffinityMode::Semantic) {
    return static_cast<std::size_t>(cloud_.segment_labels[index_.nearest(q).index]);
  }
  const Eigen::VectorXd d =
      config_.mode == AffinityMode::Intrinsic ? intrinsic_dist(q, index_, *table_) : euclid_dist(q, centers_);
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < d.size(); ++i) {
    if (d[i] < d[best]) best = i;
  }
  return static_cast<std::size_t>(best);
}

}  // namespace lpi
