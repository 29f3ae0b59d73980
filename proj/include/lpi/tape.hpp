#pragma once

#include "lpi/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace lpi {

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid until the tape is cleared.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::int32_t id) : tape_(tape), id_(id) {}

  Tape* tape() const { return tape_; }
  std::int32_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr && id_ >= 0; }

  const Tensor& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  bool requires_grad() const;

 private:
  Tape* tape_ = nullptr;
  std::int32_t id_ = -1;
};

enum class Op : std::uint8_t {
  Leaf,
  MatMul,
  Add,
  Sub,
  Neg,
  Mul,
  Div,
  Affine,
  AddRow,
  MulCol,
  SumRows,
  SumCols,
  SumAll,
  BroadcastRows,
  BroadcastCols,
  BroadcastScalar,
  Softplus,
  Sigmoid,
  Square,
  Sqrt,
  ConcatCols,
  SliceCols,
  PadCols,
  GatherRows,
  ScatterAddRows,
};

/// Eager reverse-mode tape over 2-D tensors.
///
/// Every node's value is computed when it is recorded. grad() walks the tape
/// backwards and expresses each vector-Jacobian product with recorded ops, so
/// a gradient can itself be differentiated: the result of one grad() call can
/// feed into a loss whose gradient is taken by a second call.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf that gradients can be taken with respect to.
  Var variable(Tensor value);
  /// Leaf excluded from differentiation.
  Var constant(Tensor value);

  /// Gradients of sum(seed ⊙ y) with respect to each of `wrt`. When seed is
  /// omitted y must be 1x1. Inputs that y does not depend on get a zero tensor.
  /// With create_graph the returned Vars are differentiable again.
  std::vector<Var> grad(Var y, std::span<const Var> wrt, bool create_graph = false);
  std::vector<Var> grad(Var y, Var seed, std::span<const Var> wrt, bool create_graph = false);

  /// Raise NumericalError as soon as an op produces a non-finite value.
  /// On by default in debug builds.
  void set_check_finite(bool on) { check_finite_ = on; }
  bool check_finite() const { return check_finite_; }

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

  const Tensor& value(std::int32_t id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  bool requires_grad(std::int32_t id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }

  /// Low-level record used by the op functions below.
  struct Node {
    Op op = Op::Leaf;
    std::int32_t in0 = -1;
    std::int32_t in1 = -1;
    bool requires_grad = false;
    bool trans_a = false;
    bool trans_b = false;
    double a = 0.0;
    double b = 0.0;
    Eigen::Index i0 = 0;
    Eigen::Index i1 = 0;
    std::shared_ptr<const std::vector<Eigen::Index>> index;
    Tensor value;
  };
  Var push(Node node);

 private:
  Var vjp(std::int32_t id, int input, Var g);

  std::vector<Node> nodes_;
#ifdef NDEBUG
  bool check_finite_ = false;
#else
  bool check_finite_ = true;
#endif
};

// Differentiable ops. All operands must live on the same tape.

/// op(a) * op(b), where op transposes when the flag is set.
Var matmul(Var a, Var b, bool transpose_a = false, bool transpose_b = false);
Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator-(Var a);
/// Elementwise product.
Var operator*(Var a, Var b);
/// Elementwise quotient.
Var operator/(Var a, Var b);
/// scale * a + shift, elementwise.
Var affine(Var a, double scale, double shift = 0.0);
/// a (n x m) plus row vector b (1 x m) on every row.
Var add_row(Var a, Var b);
/// a (n x m) with row r scaled by c(r) for column vector c (n x 1).
Var mul_col(Var a, Var c);
Var sum_rows(Var a);  // n x m -> 1 x m
Var sum_cols(Var a);  // n x m -> n x 1
Var sum_all(Var a);   // -> 1 x 1
Var broadcast_rows(Var a, Eigen::Index rows);  // 1 x m -> rows x m
Var broadcast_cols(Var a, Eigen::Index cols);  // n x 1 -> n x cols
Var broadcast_scalar(Var a, Eigen::Index rows, Eigen::Index cols);
/// log(1 + exp(beta x)) / beta.
Var softplus(Var a, double beta);
/// 1 / (1 + exp(-beta x)), the derivative of softplus.
Var sigmoid(Var a, double beta);
Var square(Var a);
Var sqrt(Var a);
Var concat_cols(Var a, Var b);
Var slice_cols(Var a, Eigen::Index start, Eigen::Index count);
/// Places a into columns [start, start + a.cols) of a zero rows x total matrix.
Var pad_cols(Var a, Eigen::Index start, Eigen::Index total);
/// out.row(r) = a.row(index[r]).
Var gather_rows(Var a, std::shared_ptr<const std::vector<Eigen::Index>> index);
/// out (rows x m) accumulates a.row(r) into out.row(index[r]).
Var scatter_add_rows(Var a, std::shared_ptr<const std::vector<Eigen::Index>> index, Eigen::Index rows);

/// Numerically stable scalar softplus and sigmoid shared by the tape and plain evaluators.
double softplus_value(double x, double beta);
double sigmoid_value(double x, double beta);

}  // namespace lpi
