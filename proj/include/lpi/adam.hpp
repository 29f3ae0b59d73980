#pragma once

#include "lpi/tensor.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace lpi {

struct AdamState {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  std::vector<Tensor> m;  // first moments, shaped like the parameters
  std::vector<Tensor> v;  // second moments

  bool operator==(const AdamState&) const = default;
};

/// One bias-corrected Adam update applied in place. Moments are created on the
/// first call; later calls throw InvalidArgument when shapes disagree.
void adam_step(AdamState& state, std::span<Tensor* const> params, std::span<const Tensor> grads);

}  // namespace lpi
