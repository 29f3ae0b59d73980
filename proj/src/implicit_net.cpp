#include "lpi/implicit_net.hpp"

#include "lpi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace lpi {
namespace {

std::vector<std::size_t> layer_dims(const NetConfig& config, std::size_t input_dim) {
  std::vector<std::size_t> dims;
  dims.push_back(input_dim);
  for (std::size_t l = 0; l < config.hidden_layers; ++l) dims.push_back(config.hidden_width);
  dims.push_back(1);
  return dims;
}

}  // namespace

bool ImplicitNet::is_skip(std::size_t layer) const {
  return layer > 0 && std::find(config_.skip_layers.begin(), config_.skip_layers.end(), layer) !=
                          config_.skip_layers.end();
}

ImplicitNet::ImplicitNet(const NetConfig& config, std::size_t latent_dim, std::uint64_t seed)
    : config_(config), latent_dim_(latent_dim) {
  if (config.hidden_layers < 1 || config.hidden_width < 1) throw InvalidArgument("net needs a hidden layer");
  if (!(config.softplus_beta > 0)) throw InvalidArgument("softplus beta must be positive");
  const auto dims = layer_dims(config, input_dim());
  const std::size_t layers = dims.size() - 1;
  for (auto s : config.skip_layers) {
    if (s == 0 || s >= layers) throw InvalidArgument("skip layer index out of range");
    if (dims[s] <= input_dim()) throw InvalidArgument("hidden width too small for a skip connection");
  }

  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = dims[l];
    const std::size_t out = is_skip(l + 1) ? dims[l + 1] - input_dim() : dims[l + 1];
    Tensor w(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
    Tensor b = Tensor::Zero(1, static_cast<Eigen::Index>(out));
    if (l + 1 == layers) {
      std::normal_distribution<double> dist(std::sqrt(std::numbers::pi) / std::sqrt(static_cast<double>(in)), 1e-5);
      for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
      b(0, 0) = -config.init_radius;
    } else {
      std::normal_distribution<double> dist(0.0, std::sqrt(2.0) / std::sqrt(static_cast<double>(out)));
      for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
    }
    weights_.push_back(std::move(w));
    biases_.push_back(std::move(b));
  }
}

ImplicitNet ImplicitNet::from_parts(NetConfig config, std::size_t latent_dim, std::vector<Tensor> weights,
                                    std::vector<Tensor> biases) {
  ImplicitNet net;
  net.config_ = std::move(config);
  net.latent_dim_ = latent_dim;
  const auto dims = layer_dims(net.config_, net.input_dim());
  if (weights.size() != dims.size() - 1 || biases.size() != weights.size()) {
    throw FormatError("layer count does not match the network configuration");
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const std::size_t out = net.is_skip(l + 1) ? dims[l + 1] - net.input_dim() : dims[l + 1];
    if (weights[l].rows() != static_cast<Eigen::Index>(out) || weights[l].cols() != static_cast<Eigen::Index>(dims[l]) ||
        biases[l].rows() != 1 || biases[l].cols() != static_cast<Eigen::Index>(out)) {
      throw FormatError("layer shape does not match the network configuration");
    }
  }
  net.weights_ = std::move(weights);
  net.biases_ = std::move(biases);
  return net;
}

std::vector<Tensor*> ImplicitNet::parameters() {
  std::vector<Tensor*> out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(&weights_[l]);
    out.push_back(&biases_[l]);
  }
  return out;
}

std::vector<const Tensor*> ImplicitNet::parameters() const {
  std::vector<const Tensor*> out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(&weights_[l]);
    out.push_back(&biases_[l]);
  }
  return out;
}

std::size_t ImplicitNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += static_cast<std::size_t>(p->size());
  return n;
}

Eigen::VectorXd ImplicitNet::evaluate(const Tensor& queries, const Tensor& latents) const {
  if (queries.cols() != 3 || latents.cols() != static_cast<Eigen::Index>(latent_dim_) ||
      queries.rows() != latents.rows()) {
    throw InvalidArgument("evaluate: expected B x 3 queries and B x T latents");
  }
  Tensor input(queries.rows(), static_cast<Eigen::Index>(input_dim()));
  input << queries, latents;
  const double beta = config_.softplus_beta;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Tensor h = input;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    if (is_skip(l)) {
      Tensor joined(h.rows(), h.cols() + input.cols());
      joined << h, input;
      h = (joined.array() * inv_sqrt2).matrix();
    }
    Tensor z(h.rows(), weights_[l].rows());
    z.noalias() = h * weights_[l].transpose();
    z.rowwise() += biases_[l].row(0);
    if (l + 1 < weights_.size()) {
      h = z.unaryExpr([beta](double x) { return softplus_value(x, beta); });
    } else {
      h = std::move(z);
    }
  }
  return h.col(0);
}

std::vector<Var> ImplicitNet::Bound::all() const {
  std::vector<Var> out;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.push_back(weights[l]);
    out.push_back(biases[l]);
  }
  return out;
}

ImplicitNet::Bound ImplicitNet::bind(Tape& tape, bool trainable) const {
  Bound bound;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    bound.weights.push_back(trainable ? tape.variable(weights_[l]) : tape.constant(weights_[l]));
    bound.biases.push_back(trainable ? tape.variable(biases_[l]) : tape.constant(biases_[l]));
  }
  return bound;
}

Var ImplicitNet::forward(const Bound& params, Var queries, Var latents) const {
  if (queries.cols() != 3 || latents.cols() != static_cast<Eigen::Index>(latent_dim_)) {
    throw InvalidArgument("forward: expected B x 3 queries and B x T latents");
  }
  const Var input = concat_cols(queries, latents);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Var h = input;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    if (is_skip(l)) h = affine(concat_cols(h, input), inv_sqrt2);
    h = add_row(matmul(h, params.weights[l], false, true), params.biases[l]);
    if (l + 1 < weights_.size()) h = softplus(h, config_.softplus_beta);
  }
  return h;
}

Var blend_codes(Var affinities, Var codes) { return matmul(affinities, codes); }

Var input_gradient(Var s, Var queries) {
  Tape& tape = *s.tape();
  const Var seed = tape.constant(Tensor::Ones(s.rows(), s.cols()));
  const Var wrt[] = {queries};
  return tape.grad(s, seed, wrt, /*create_graph=*/true).front();
}

Tensor init_surface_codes(std::size_t count, std::size_t latent_dim, double stddev, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, stddev);
  Tensor codes(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(latent_dim));
  for (Eigen::Index i = 0; i < codes.size(); ++i) codes.data()[i] = dist(rng);
  return codes;
}

double forward(const ImplicitNet& net, const Vec3& q, const Eigen::VectorXd& w) {
  Tensor queries(1, 3);
  queries.row(0) = q.transpose();
  Tensor latents = w.transpose();
  return net.evaluate(queries, latents)[0];
}

Vec3 input_gradient(const ImplicitNet& net, const Vec3& q, const Eigen::VectorXd& w) {
  Tape tape;
  const auto params = net.bind(tape, false);
  Tensor qt(1, 3);
  qt.row(0) = q.transpose();
  const Var queries = tape.variable(std::move(qt));
  const Var latents = tape.constant(w.transpose());
  const Var s = net.forward(params, queries, latents);
  const Var g = input_gradient(s, queries);
  return g.value().row(0).transpose();
}

}  // namespace lpi
