#include "lpi/training.hpp"

#include "lpi/adam.hpp"
#include "lpi/spatial_index.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <string>

namespace lpi {

QuerySet QuerySet::subset(std::span<const std::size_t> rows) const {
  QuerySet out;
  out.queries.reserve(rows.size());
  out.parents.reserve(rows.size());
  out.affinities.resize(static_cast<Eigen::Index>(rows.size()), affinities.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t src = rows[r];
    out.queries.push_back(queries[src]);
    out.parents.push_back(parents[src]);
    if (affinities.rows() > 0) out.affinities.row(static_cast<Eigen::Index>(r)) = affinities.row(static_cast<Eigen::Index>(src));
    if (supervised()) out.gt_sdf.push_back(gt_sdf[src]);
  }
  return out;
}

QuerySet sample_queries(const PointCloud& cloud, std::size_t per_point, std::size_t knn_k, std::uint64_t seed) {
  const std::size_t n = cloud.size();
  if (knn_k < 1 || knn_k >= n) {
    throw InvalidArgument("query noise neighbor count must satisfy 1 <= k < N (k=" + std::to_string(knn_k) +
                          ", N=" + std::to_string(n) + ")");
  }
  QuerySet set;
  if (per_point == 0) return set;
  const SpatialIndex index(cloud.points);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  set.queries.reserve(n * per_point);
  set.parents.reserve(n * per_point);
  for (std::size_t i = 0; i < n; ++i) {
    const double stddev = index.knn(cloud.points[i], knn_k, i).back().distance;
    for (std::size_t j = 0; j < per_point; ++j) {
      Vec3 offset;
      for (int k = 0; k < 3; ++k) offset[k] = normal(rng);
      set.queries.push_back(cloud.points[i] + stddev * offset);
      set.parents.push_back(i);
    }
  }
  return set;
}

void assign_affinities(QuerySet& set, const AffinityField& field) { set.affinities = field.affinities(set.queries); }

void assign_ground_truth(QuerySet& set, const SdfFunction& sdf) {
  set.gt_sdf.resize(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    set.gt_sdf[i] = sdf(set.queries[i]);
    if (!std::isfinite(set.gt_sdf[i])) throw NumericalError("ground-truth signed distance is not finite");
  }
}

namespace {

Tensor stack_rows(std::span<const Vec3> points) {
  Tensor out(static_cast<Eigen::Index>(points.size()), 3);
  for (std::size_t i = 0; i < points.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = points[i].transpose();
  return out;
}

using Index = std::shared_ptr<const std::vector<Eigen::Index>>;

Index make_index(std::vector<Eigen::Index> rows) {
  return std::make_shared<const std::vector<Eigen::Index>>(std::move(rows));
}

// For each row of `from`, the row of `to` at minimum squared distance (lowest index on ties).
std::vector<Eigen::Index> nearest_rows(const Tensor& from, const Tensor& to) {
  std::vector<Eigen::Index> out(static_cast<std::size_t>(from.rows()));
  for (Eigen::Index i = 0; i < from.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index arg = 0;
    for (Eigen::Index j = 0; j < to.rows(); ++j) {
      const double d = (from.row(i) - to.row(j)).squaredNorm();
      if (d < best) {
        best = d;
        arg = j;
      }
    }
    out[static_cast<std::size_t>(i)] = arg;
  }
  return out;
}

}  // namespace

Projection project_queries(const ImplicitNet& net, const ImplicitNet::Bound& params, Var codes, const QuerySet& batch,
                           double min_gradient) {
  Tape& tape = *codes.tape();
  const Var q = tape.variable(stack_rows(batch.queries));
  const Var affinity = tape.constant(batch.affinities);
  const Var s = net.forward(params, q, blend_codes(affinity, codes));
  const Var g = input_gradient(s, q);

  Projection out;
  std::vector<Eigen::Index> kept;
  const Tensor& gv = g.value();
  for (Eigen::Index r = 0; r < gv.rows(); ++r) {
    if (gv.row(r).norm() >= min_gradient) {
      kept.push_back(r);
      out.kept.push_back(static_cast<std::size_t>(r));
    } else {
      ++out.excluded;
    }
  }
  if (kept.empty()) return out;
  // Rows are filtered before the division so excluded rows never see 0/0.
  const Index rows = make_index(std::move(kept));
  const Var gk = gather_rows(g, rows);
  const Var sk = gather_rows(s, rows);
  const Var qk = gather_rows(q, rows);
  const Var norm = sqrt(sum_cols(square(gk)));
  out.projected = qk - mul_col(gk, sk / norm);
  return out;
}

Vec3 project_query(const ImplicitNet& net, const Tensor& codes, const Vec3& q, const AffinityVector& a) {
  const Eigen::VectorXd w = codes.transpose() * a;
  const double s = forward(net, q, w);
  const Vec3 g = input_gradient(net, q, w);
  const double n = g.norm();
  if (n < kMinGradientNorm) throw NumericalError("vanishing gradient at query");
  return q - s * g / n;
}

LossValue pulling_loss(const ImplicitNet& net, const ImplicitNet::Bound& params, Var codes, const QuerySet& batch,
                       const PointCloud& cloud) {
  const Projection proj = project_queries(net, params, codes, batch);
  if (proj.kept.empty()) throw EmptyBatch("every query in the batch has a vanishing gradient");

  std::vector<std::size_t> parents;
  parents.reserve(proj.kept.size());
  for (auto r : proj.kept) parents.push_back(batch.parents[r]);
  std::sort(parents.begin(), parents.end());
  parents.erase(std::unique(parents.begin(), parents.end()), parents.end());
  Tensor surface(static_cast<Eigen::Index>(parents.size()), 3);
  for (std::size_t i = 0; i < parents.size(); ++i) {
    surface.row(static_cast<Eigen::Index>(i)) = cloud.points[parents[i]].transpose();
  }

  Tape& tape = *codes.tape();
  const Tensor& projected = proj.projected.value();
  const auto surface_to_projected = nearest_rows(surface, projected);
  const auto projected_to_surface = nearest_rows(projected, surface);

  Tensor matched_surface(projected.rows(), 3);
  for (Eigen::Index r = 0; r < projected.rows(); ++r) {
    matched_surface.row(r) = surface.row(projected_to_surface[static_cast<std::size_t>(r)]);
  }
  const Var x = tape.constant(std::move(surface));
  const Var y_for_x = gather_rows(proj.projected, make_index(surface_to_projected));
  const Var x_for_y = tape.constant(std::move(matched_surface));
  const Var loss = sum_all(square(x - y_for_x)) + sum_all(square(proj.projected - x_for_y));
  return {loss, proj.excluded};
}

LossValue mse_loss(const ImplicitNet& net, const ImplicitNet::Bound& params, Var codes, const QuerySet& batch) {
  if (!batch.supervised()) throw InvalidArgument("MSE loss needs ground-truth signed distances");
  if (batch.size() == 0) throw EmptyBatch("empty batch");
  Tape& tape = *codes.tape();
  const Var q = tape.constant(stack_rows(batch.queries));
  const Var s = net.forward(params, q, blend_codes(tape.constant(batch.affinities), codes));
  Tensor gt(static_cast<Eigen::Index>(batch.size()), 1);
  for (std::size_t i = 0; i < batch.size(); ++i) gt(static_cast<Eigen::Index>(i), 0) = batch.gt_sdf[i];
  const Var loss = affine(sum_all(square(s - tape.constant(std::move(gt)))), 1.0 / static_cast<double>(batch.size()));
  return {loss, 0};
}

std::string_view to_string(LossMode mode) { return mode == LossMode::Pulling ? "pulling" : "mse"; }

LossMode parse_loss_mode(std::string_view name) {
  if (name == "pulling") return LossMode::Pulling;
  if (name == "mse") return LossMode::Mse;
  throw InvalidArgument("unknown loss '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (batch == 0 || queries_per_point == 0 || noise_knn == 0 || log_every == 0) {
    throw InvalidArgument("training counts must be positive");
  }
  if (!(lr > 0.0)) throw InvalidArgument("learning rate must be positive");
}

Checkpoint initialize_checkpoint(PointCloud normalized_cloud, Normalization normalization, RegionCenters centers,
                                 const ModelConfig& config, std::uint64_t seed) {
  normalized_cloud.validate();
  if (centers.size() == 0) throw InvalidArgument("at least one region center is required");
  if (config.latent_dim == 0) throw InvalidArgument("latent dimension must be positive");
  config.affinity.validate(normalized_cloud.segment_count());

  // Separate streams so changing one component never shifts another.
  const auto lo = static_cast<std::uint32_t>(seed);
  const auto hi = static_cast<std::uint32_t>(seed >> 32);
  std::seed_seq net_seq{lo, hi, 1u};
  std::seed_seq code_seq{lo, hi, 2u};
  std::seed_seq unseen_seq{lo, hi, 3u};
  auto draw = [](std::seed_seq& seq) {
    std::uint32_t parts[2];
    seq.generate(parts, parts + 2);
    return (static_cast<std::uint64_t>(parts[0]) << 32) | parts[1];
  };

  Checkpoint c;
  c.net = ImplicitNet(config.net, config.latent_dim, draw(net_seq));
  c.codes = init_surface_codes(centers.size(), config.latent_dim, config.code_init_std, draw(code_seq));
  c.unseen_code = init_surface_codes(1, config.latent_dim, config.code_init_std, draw(unseen_seq));
  c.centers = std::move(centers);
  c.cloud = std::move(normalized_cloud);
  c.affinity = config.affinity;
  c.geodesic_knn = config.geodesic_knn;
  c.normalization = normalization;
  c.step = 0;
  return c;
}

TrainResult train(Checkpoint start, const TrainConfig& config, const SdfFunction* ground_truth, std::ostream* log) {
  config.validate();
  if (config.loss == LossMode::Mse && ground_truth == nullptr) {
    throw InvalidArgument("MSE training needs ground-truth signed distances");
  }

  TrainResult result;
  result.checkpoint = std::move(start);
  Checkpoint& current = result.checkpoint;
  if (config.steps == 0) return result;

  const AffinityField field = make_affinity_field(current);
  QuerySet queries = sample_queries(current.cloud, config.queries_per_point, config.noise_knn, config.seed);
  assign_affinities(queries, field);
  if (config.loss == LossMode::Mse) assign_ground_truth(queries, *ground_truth);

  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<std::size_t> order(queries.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t cursor = 0;
  const std::size_t batch_size = std::min(config.batch, queries.size());

  AdamState adam;
  adam.lr = config.lr;
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::size_t> rows(batch_size);

  for (std::size_t step = 0; step < config.steps; ++step) {
    for (auto& r : rows) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      r = order[cursor++];
    }
    const QuerySet batch = queries.subset(rows);

    Tape tape;
    const auto params = current.net.bind(tape, true);
    const Var codes = tape.variable(current.codes);
    LossValue value;
    try {
      value = config.loss == LossMode::Pulling ? pulling_loss(current.net, params, codes, batch, current.cloud)
                                               : mse_loss(current.net, params, codes, batch);
    } catch (const EmptyBatch& e) {
      throw TrainingAborted(std::string(e.what()) + " at step " + std::to_string(current.step), current);
    }
    const double loss = value.loss.value()(0, 0);
    if (!std::isfinite(loss)) {
      throw TrainingAborted("loss became non-finite at step " + std::to_string(current.step), current);
    }

    std::vector<Var> wrt = params.all();
    wrt.push_back(codes);
    const auto grads = tape.grad(value.loss, wrt);
    std::vector<Tensor> grad_values;
    grad_values.reserve(grads.size());
    for (const Var& g : grads) {
      if (!g.value().allFinite()) {
        throw TrainingAborted("gradient became non-finite at step " + std::to_string(current.step), current);
      }
      grad_values.push_back(g.value());
    }
    std::vector<Tensor*> targets = current.net.parameters();
    targets.push_back(&current.codes);
    adam_step(adam, targets, grad_values);
    ++current.step;

    result.losses.push_back(loss);
    result.excluded.push_back(value.excluded);
    if (log != nullptr && (step % config.log_every == 0 || step + 1 == config.steps)) {
      const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0);
      nlohmann::json line = {{"step", step}, {"loss", loss}, {"excluded", value.excluded}, {"wall_ms", ms.count()}};
      *log << line.dump() << '\n';
      log->flush();
    }
  }
  return result;
}

}  // namespace lpi
