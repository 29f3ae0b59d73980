#pragma once

#include <Eigen/Core>

namespace lpi {

/// Dense row-major matrix of 64-bit reals; the value type of every tape node.
using Tensor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace lpi
