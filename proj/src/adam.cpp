#include "lpi/adam.hpp"

#include "lpi/errors.hpp"

#include <cmath>

namespace lpi {

void adam_step(AdamState& state, std::span<Tensor* const> params, std::span<const Tensor> grads) {
  if (params.size() != grads.size()) throw InvalidArgument("adam: parameter and gradient counts differ");
  if (state.m.empty()) {
    for (const Tensor* p : params) {
      state.m.push_back(Tensor::Zero(p->rows(), p->cols()));
      state.v.push_back(Tensor::Zero(p->rows(), p->cols()));
    }
  }
  if (state.m.size() != params.size()) throw InvalidArgument("adam: parameter count changed between steps");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor& p = *params[i];
    if (grads[i].rows() != p.rows() || grads[i].cols() != p.cols() || state.m[i].rows() != p.rows() ||
        state.m[i].cols() != p.cols()) {
      throw InvalidArgument("adam: shape mismatch for parameter " + std::to_string(i));
    }
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto m = state.m[i].array();
    auto v = state.v[i].array();
    const auto g = grads[i].array();
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.square();
    params[i]->array() -= state.lr * (m / correction1) / ((v / correction2).sqrt() + state.eps);
  }
}

}  // namespace lpi
