#pragma once

#include "lpi/geom.hpp"
#include "lpi/tape.hpp"
#include "lpi/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace lpi {

struct NetConfig {
  std::size_t hidden_layers = 8;
  std::size_t hidden_width = 256;
  /// Hidden layers whose input is concat(previous, network input) / sqrt(2).
  std::vector<std::size_t> skip_layers = {4};
  double softplus_beta = 100.0;
  /// Radius of the sphere the geometric initialization approximates.
  double init_radius = 0.3;

  bool operator==(const NetConfig&) const = default;
};

/// f_theta(q, w): an MLP over concat(q, w) producing one signed distance per row.
///
/// Linear layer l maps dims[l] -> dims[l+1] with weights stored out x in.
/// Hidden activations are softplus, which keeps second derivatives smooth.
class ImplicitNet {
 public:
  ImplicitNet() = default;
  /// Geometric initialization: the untrained net approximates the SDF of a
  /// sphere of radius config.init_radius.
  ImplicitNet(const NetConfig& config, std::size_t latent_dim, std::uint64_t seed);

  const NetConfig& config() const { return config_; }
  std::size_t latent_dim() const { return latent_dim_; }
  std::size_t input_dim() const { return 3 + latent_dim_; }
  std::size_t layer_count() const { return weights_.size(); }
  bool is_skip(std::size_t layer) const;

  std::vector<Tensor>& weights() { return weights_; }
  const std::vector<Tensor>& weights() const { return weights_; }
  std::vector<Tensor>& biases() { return biases_; }
  const std::vector<Tensor>& biases() const { return biases_; }

  /// Pointers to every parameter tensor, ordered w0, b0, w1, b1, ...
  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
  std::size_t parameter_count() const;

  /// Batched evaluation without a tape: rows of `queries` (B x 3) pair with rows of `latents` (B x T).
  Eigen::VectorXd evaluate(const Tensor& queries, const Tensor& latents) const;

  /// Parameter handles recorded on a tape.
  struct Bound {
    std::vector<Var> weights;
    std::vector<Var> biases;
    /// Same order as parameters().
    std::vector<Var> all() const;
  };
  Bound bind(Tape& tape, bool trainable) const;

  /// B x 1 signed distances recorded on the tape.
  Var forward(const Bound& params, Var queries, Var latents) const;

  bool operator==(const ImplicitNet&) const = default;

  /// Restores a network from serialized parts (layer shapes are checked).
  static ImplicitNet from_parts(NetConfig config, std::size_t latent_dim, std::vector<Tensor> weights,
                                std::vector<Tensor> biases);

 private:
  NetConfig config_;
  std::size_t latent_dim_ = 0;
  std::vector<Tensor> weights_;
  std::vector<Tensor> biases_;
};

/// w = sum_i a_i t_i for every row: (B x I) * (I x T). Affinities enter as
/// constants, so gradients reach only the codes.
Var blend_codes(Var affinities, Var codes);

/// ds/dq for every row (B x 3), recorded so it stays differentiable with
/// respect to parameters, codes and queries.
Var input_gradient(Var s, Var queries);

/// I x T surface codes drawn i.i.d. from N(0, stddev^2).
Tensor init_surface_codes(std::size_t count, std::size_t latent_dim, double stddev, std::uint64_t seed);

/// Single-query conveniences built on the tape.
double forward(const ImplicitNet& net, const Vec3& q, const Eigen::VectorXd& w);
Vec3 input_gradient(const ImplicitNet& net, const Vec3& q, const Eigen::VectorXd& w);

}  // namespace lpi
