#pragma once

#include "lpi/affinity.hpp"
#include "lpi/checkpoint.hpp"
#include "lpi/errors.hpp"
#include "lpi/geom.hpp"
#include "lpi/implicit_net.hpp"
#include "lpi/tape.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace lpi {

/// Queries sampled around the surface, with affinities frozen at sampling time.
struct QuerySet {
  std::vector<Vec3> queries;
  Tensor affinities;               // Q x I
  std::vector<double> gt_sdf;      // empty unless supervised
  std::vector<std::size_t> parents;  // surface point each query was drawn around

  std::size_t size() const { return queries.size(); }
  bool supervised() const { return !gt_sdf.empty(); }
  QuerySet subset(std::span<const std::size_t> rows) const;
};

/// For every surface point x, draws `per_point` queries from N(x, s_x^2 I) where
/// s_x is the distance from x to its knn_k-th nearest neighbor. Affinities are
/// left empty; see assign_affinities.
QuerySet sample_queries(const PointCloud& cloud, std::size_t per_point, std::size_t knn_k, std::uint64_t seed);

void assign_affinities(QuerySet& set, const AffinityField& field);

using SdfFunction = std::function<double(const Vec3&)>;
/// Fills gt_sdf from an analytic signed distance function.
void assign_ground_truth(QuerySet& set, const SdfFunction& sdf);

/// Projected queries q' = q - s * grad / |grad| for the rows whose gradient norm
/// is at least `min_gradient`. Everything stays on the tape.
struct Projection {
  Var projected;                      // K x 3
  std::vector<std::size_t> kept;      // batch rows that were projected
  std::size_t excluded = 0;
};

inline constexpr double kMinGradientNorm = 1e-12;

Projection project_queries(const ImplicitNet& net, const ImplicitNet::Bound& params, Var codes,
                           const QuerySet& batch, double min_gradient = kMinGradientNorm);

/// Single-query projection with the same formula (no gradients kept).
Vec3 project_query(const ImplicitNet& net, const Tensor& codes, const Vec3& q, const AffinityVector& a);

struct LossValue {
  Var loss;  // 1 x 1
  std::size_t excluded = 0;
};

/// Symmetric Chamfer between the batch's parent surface points and the projected
/// queries, both terms summed over points (not averaged). Throws EmptyBatch when
/// every query had a vanishing gradient.
LossValue pulling_loss(const ImplicitNet& net, const ImplicitNet::Bound& params, Var codes, const QuerySet& batch,
                       const PointCloud& cloud);

/// Mean squared error against gt_sdf. Throws InvalidArgument without ground truth.
LossValue mse_loss(const ImplicitNet& net, const ImplicitNet::Bound& params, Var codes, const QuerySet& batch);

enum class LossMode { Pulling, Mse };
std::string_view to_string(LossMode mode);
LossMode parse_loss_mode(std::string_view name);

/// Architecture and partition settings that are frozen into a checkpoint.
struct ModelConfig {
  NetConfig net;
  std::size_t latent_dim = 100;
  AffinityConfig affinity;
  std::size_t geodesic_knn = 10;
  double code_init_std = 1e-2;
};

struct TrainConfig {
  std::size_t steps = 20000;
  std::size_t batch = 512;
  double lr = 1e-4;
  LossMode loss = LossMode::Pulling;
  std::size_t queries_per_point = 20;
  std::size_t noise_knn = 50;
  std::uint64_t seed = 0;
  std::size_t log_every = 100;

  void validate() const;
};

/// Fresh model: geometric network initialization, small random surface codes,
/// and an unseen code drawn from a reserved stream.
Checkpoint initialize_checkpoint(PointCloud normalized_cloud, Normalization normalization, RegionCenters centers,
                                 const ModelConfig& config, std::uint64_t seed);

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<double> losses;          // one per step
  std::vector<std::size_t> excluded;   // vanishing-gradient exclusions per step
};

/// Raised when the loss turns non-finite or a whole batch is excluded; carries
/// the last finite state.
class TrainingAborted : public NumericalError {
 public:
  TrainingAborted(const std::string& what, Checkpoint last_good)
      : NumericalError(what), last_good_(std::make_shared<Checkpoint>(std::move(last_good))) {}
  const Checkpoint& last_good() const { return *last_good_; }

 private:
  std::shared_ptr<Checkpoint> last_good_;
};

/// Runs config.steps Adam steps over shuffled query batches starting from `start`.
/// In MSE mode `ground_truth` (normalized coordinates) must be provided. When `log`
/// is set, one JSON object {step, loss, excluded, wall_ms} is written per logged step.
TrainResult train(Checkpoint start, const TrainConfig& config, const SdfFunction* ground_truth = nullptr,
                  std::ostream* log = nullptr);

}  // namespace lpi
