#include "lpi/tape.hpp"

#include "lpi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lpi {
namespace {

const char* op_name(Op op) {
  switch (op) {
    case Op::Leaf: return "leaf";
    case Op::MatMul: return "matmul";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Neg: return "neg";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::Affine: return "affine";
    case Op::AddRow: return "add_row";
    case Op::MulCol: return "mul_col";
    case Op::SumRows: return "sum_rows";
    case Op::SumCols: return "sum_cols";
    case Op::SumAll: return "sum_all";
    case Op::BroadcastRows: return "broadcast_rows";
    case Op::BroadcastCols: return "broadcast_cols";
    case Op::BroadcastScalar: return "broadcast_scalar";
    case Op::Softplus: return "softplus";
    case Op::Sigmoid: return "sigmoid";
    case Op::Square: return "square";
    case Op::Sqrt: return "sqrt";
    case Op::ConcatCols: return "concat_cols";
    case Op::SliceCols: return "slice_cols";
    case Op::PadCols: return "pad_cols";
    case Op::GatherRows: return "gather_rows";
    case Op::ScatterAddRows: return "scatter_add_rows";
  }
  return "?";
}

Tape& same_tape(Var a, Var b) {
  if (!a.valid() || !b.valid() || a.tape() != b.tape()) throw InvalidArgument("operands live on different tapes");
  return *a.tape();
}

Tape& tape_of(Var a) {
  if (!a.valid()) throw InvalidArgument("invalid tape variable");
  return *a.tape();
}

void require_same_shape(Var a, Var b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument(std::string(what) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()) + ")");
  }
}

Var unary(Op op, Var a, Tensor value, double pa = 0.0) {
  Tape::Node node;
  node.op = op;
  node.in0 = a.id();
  node.a = pa;
  node.value = std::move(value);
  return tape_of(a).push(std::move(node));
}

Var binary(Op op, Var a, Var b, Tensor value) {
  Tape& tape = same_tape(a, b);
  Tape::Node node;
  node.op = op;
  node.in0 = a.id();
  node.in1 = b.id();
  node.value = std::move(value);
  return tape.push(std::move(node));
}

}  // namespace

double softplus_value(double x, double beta) {
  const double z = beta * x;
  // log(1 + e^z) = max(z, 0) + log1p(e^-|z|)
  return (std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)))) / beta;
}

double sigmoid_value(double x, double beta) {
  const double z = beta * x;
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

const Tensor& Var::value() const { return tape_->value(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::variable(Tensor value) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = true;
  return push(std::move(node));
}

Var Tape::constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  return push(std::move(node));
}

Var Tape::push(Node node) {
  if (node.op != Op::Leaf) {
    node.requires_grad = (node.in0 >= 0 && nodes_[static_cast<std::size_t>(node.in0)].requires_grad) ||
                         (node.in1 >= 0 && nodes_[static_cast<std::size_t>(node.in1)].requires_grad);
  }
  if (check_finite_ && !node.value.allFinite()) {
    throw NumericalError(std::string("non-finite value produced by ") + op_name(node.op));
  }
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<std::int32_t>(nodes_.size() - 1));
}

std::vector<Var> Tape::grad(Var y, std::span<const Var> wrt, bool create_graph) {
  if (y.rows() != 1 || y.cols() != 1) throw InvalidArgument("grad without a seed needs a scalar output");
  return grad(y, constant(Tensor::Ones(1, 1)), wrt, create_graph);
}

std::vector<Var> Tape::grad(Var y, Var seed, std::span<const Var> wrt, bool create_graph) {
  if (y.tape() != this || seed.tape() != this) throw InvalidArgument("grad: variable from another tape");
  require_same_shape(y, seed, "grad seed");
  const std::int32_t top = y.id();
  const auto n = static_cast<std::size_t>(top) + 1;

  // depends[id]: node id is a wrt variable or computed from one.
  std::vector<char> depends(n, 0);
  std::int32_t lowest = top + 1;
  for (const Var& w : wrt) {
    if (w.tape() != this) throw InvalidArgument("grad: variable from another tape");
    if (w.id() <= top) {
      depends[static_cast<std::size_t>(w.id())] = 1;
      lowest = std::min(lowest, w.id());
    }
  }
  for (std::int32_t id = lowest; id <= top; ++id) {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if ((node.in0 >= 0 && depends[static_cast<std::size_t>(node.in0)]) ||
        (node.in1 >= 0 && depends[static_cast<std::size_t>(node.in1)])) {
      depends[static_cast<std::size_t>(id)] = 1;
    }
  }

  std::vector<Var> adjoint(n);
  adjoint[static_cast<std::size_t>(top)] = seed;
  for (std::int32_t id = top; id >= lowest; --id) {
    const Var g = adjoint[static_cast<std::size_t>(id)];
    if (!g.valid() || !depends[static_cast<std::size_t>(id)]) continue;
    const std::int32_t inputs[2] = {nodes_[static_cast<std::size_t>(id)].in0,
                                    nodes_[static_cast<std::size_t>(id)].in1};
    for (int k = 0; k < 2; ++k) {
      const std::int32_t in = inputs[k];
      if (in < 0 || !depends[static_cast<std::size_t>(in)]) continue;
      const Var contribution = vjp(id, k, g);
      Var& slot = adjoint[static_cast<std::size_t>(in)];
      slot = slot.valid() ? slot + contribution : contribution;
    }
  }

  std::vector<Var> out;
  out.reserve(wrt.size());
  for (const Var& w : wrt) {
    Var g = w.id() <= top ? adjoint[static_cast<std::size_t>(w.id())] : Var();
    if (!g.valid()) {
      out.push_back(constant(Tensor::Zero(w.rows(), w.cols())));
    } else if (!create_graph && g.requires_grad()) {
      Tensor detached = g.value();
      out.push_back(constant(std::move(detached)));
    } else {
      out.push_back(g);
    }
  }
  return out;
}

Var Tape::vjp(std::int32_t id, int input, Var g) {
  // Copy what is needed: recording new nodes may reallocate nodes_.
  const Node& node = nodes_[static_cast<std::size_t>(id)];
  const Op op = node.op;
  const Var a(this, node.in0);
  const Var b(this, node.in1);
  const Var out(this, id);
  const bool ta = node.trans_a;
  const bool tb = node.trans_b;
  const double pa = node.a;
  const Eigen::Index i0 = node.i0;
  const auto index = node.index;

  switch (op) {
    case Op::Leaf: break;
    case Op::MatMul:
      if (input == 0) {
        if (!ta && !tb) return matmul(g, b, false, true);
        if (!ta && tb) return matmul(g, b, false, false);
        if (ta && !tb) return matmul(b, g, false, true);
        return matmul(b, g, true, true);
      }
      if (!ta && !tb) return matmul(a, g, true, false);
      if (!ta && tb) return matmul(g, a, true, false);
      if (ta && !tb) return matmul(a, g, false, false);
      return matmul(g, a, true, true);
    case Op::Add: return g;
    case Op::Sub: return input == 0 ? g : -g;
    case Op::Neg: return -g;
    case Op::Mul: return input == 0 ? g * b : g * a;
    case Op::Div: return input == 0 ? g / b : -((g * out) / b);
    case Op::Affine: return affine(g, pa);
    case Op::AddRow: return input == 0 ? g : sum_rows(g);
    case Op::MulCol: return input == 0 ? mul_col(g, b) : sum_cols(g * a);
    case Op::SumRows: return broadcast_rows(g, a.rows());
    case Op::SumCols: return broadcast_cols(g, a.cols());
    case Op::SumAll: return broadcast_scalar(g, a.rows(), a.cols());
    case Op::BroadcastRows: return sum_rows(g);
    case Op::BroadcastCols: return sum_cols(g);
    case Op::BroadcastScalar: return sum_all(g);
    case Op::Softplus: return g * sigmoid(a, pa);
    case Op::Sigmoid: return g * affine(out * affine(out, -1.0, 1.0), pa);
    case Op::Square: return g * affine(a, 2.0);
    case Op::Sqrt: return affine(g, 0.5) / out;
    case Op::ConcatCols: return input == 0 ? slice_cols(g, 0, a.cols()) : slice_cols(g, a.cols(), b.cols());
    case Op::SliceCols: return pad_cols(g, i0, a.cols());
    case Op::PadCols: return slice_cols(g, i0, a.cols());
    case Op::GatherRows: return scatter_add_rows(g, index, a.rows());
    case Op::ScatterAddRows: return gather_rows(g, index);
  }
  throw InvalidArgument("vjp requested for a leaf");
}

Var matmul(Var a, Var b, bool transpose_a, bool transpose_b) {
  Tape& tape = same_tape(a, b);
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  const Eigen::Index inner_a = transpose_a ? x.rows() : x.cols();
  const Eigen::Index inner_b = transpose_b ? y.cols() : y.rows();
  if (inner_a != inner_b) throw InvalidArgument("matmul: inner dimensions differ");
  Tensor value(transpose_a ? x.cols() : x.rows(), transpose_b ? y.rows() : y.cols());
  if (!transpose_a && !transpose_b) {
    value.noalias() = x * y;
  } else if (!transpose_a) {
    value.noalias() = x * y.transpose();
  } else if (!transpose_b) {
    value.noalias() = x.transpose() * y;
  } else {
    value.noalias() = x.transpose() * y.transpose();
  }
  Tape::Node node;
  node.op = Op::MatMul;
  node.in0 = a.id();
  node.in1 = b.id();
  node.trans_a = transpose_a;
  node.trans_b = transpose_b;
  node.value = std::move(value);
  return tape.push(std::move(node));
}

Var operator+(Var a, Var b) {
  require_same_shape(a, b, "add");
  return binary(Op::Add, a, b, a.value() + b.value());
}

Var operator-(Var a, Var b) {
  require_same_shape(a, b, "sub");
  return binary(Op::Sub, a, b, a.value() - b.value());
}

Var operator-(Var a) { return unary(Op::Neg, a, -a.value()); }

Var operator*(Var a, Var b) {
  require_same_shape(a, b, "mul");
  return binary(Op::Mul, a, b, a.value().cwiseProduct(b.value()));
}

Var operator/(Var a, Var b) {
  require_same_shape(a, b, "div");
  return binary(Op::Div, a, b, a.value().cwiseQuotient(b.value()));
}

Var affine(Var a, double scale, double shift) {
  Tensor value = (a.value().array() * scale + shift).matrix();
  Tape::Node node;
  node.op = Op::Affine;
  node.in0 = a.id();
  node.a = scale;
  node.b = shift;
  node.value = std::move(value);
  return tape_of(a).push(std::move(node));
}

Var add_row(Var a, Var b) {
  if (b.rows() != 1 || b.cols() != a.cols()) throw InvalidArgument("add_row: expected 1 x cols row vector");
  Tensor value = a.value();
  value.rowwise() += b.value().row(0);
  return binary(Op::AddRow, a, b, std::move(value));
}

Var mul_col(Var a, Var c) {
  if (c.cols() != 1 || c.rows() != a.rows()) throw InvalidArgument("mul_col: expected rows x 1 column vector");
  Tensor value = c.value().col(0).asDiagonal() * a.value();
  return binary(Op::MulCol, a, c, std::move(value));
}

Var sum_rows(Var a) { return unary(Op::SumRows, a, a.value().colwise().sum()); }
Var sum_cols(Var a) { return unary(Op::SumCols, a, a.value().rowwise().sum()); }
Var sum_all(Var a) { return unary(Op::SumAll, a, Tensor::Constant(1, 1, a.value().sum())); }

Var broadcast_rows(Var a, Eigen::Index rows) {
  if (a.rows() != 1) throw InvalidArgument("broadcast_rows: expected a row vector");
  return unary(Op::BroadcastRows, a, a.value().replicate(rows, 1));
}

Var broadcast_cols(Var a, Eigen::Index cols) {
  if (a.cols() != 1) throw InvalidArgument("broadcast_cols: expected a column vector");
  return unary(Op::BroadcastCols, a, a.value().replicate(1, cols));
}

Var broadcast_scalar(Var a, Eigen::Index rows, Eigen::Index cols) {
  if (a.rows() != 1 || a.cols() != 1) throw InvalidArgument("broadcast_scalar: expected 1x1");
  return unary(Op::BroadcastScalar, a, Tensor::Constant(rows, cols, a.value()(0, 0)));
}

Var softplus(Var a, double beta) {
  Tensor value = a.value().unaryExpr([beta](double x) { return softplus_value(x, beta); });
  return unary(Op::Softplus, a, std::move(value), beta);
}

Var sigmoid(Var a, double beta) {
  Tensor value = a.value().unaryExpr([beta](double x) { return sigmoid_value(x, beta); });
  return unary(Op::Sigmoid, a, std::move(value), beta);
}

Var square(Var a) { return unary(Op::Square, a, a.value().cwiseAbs2()); }

Var sqrt(Var a) { return unary(Op::Sqrt, a, a.value().cwiseSqrt()); }

Var concat_cols(Var a, Var b) {
  if (a.rows() != b.rows()) throw InvalidArgument("concat_cols: row counts differ");
  Tensor value(a.rows(), a.cols() + b.cols());
  value << a.value(), b.value();
  return binary(Op::ConcatCols, a, b, std::move(value));
}

Var slice_cols(Var a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) throw InvalidArgument("slice_cols: out of range");
  Tape::Node node;
  node.op = Op::SliceCols;
  node.in0 = a.id();
  node.i0 = start;
  node.value = a.value().middleCols(start, count);
  return tape_of(a).push(std::move(node));
}

Var pad_cols(Var a, Eigen::Index start, Eigen::Index total) {
  if (start < 0 || start + a.cols() > total) throw InvalidArgument("pad_cols: out of range");
  Tensor value = Tensor::Zero(a.rows(), total);
  value.middleCols(start, a.cols()) = a.value();
  Tape::Node node;
  node.op = Op::PadCols;
  node.in0 = a.id();
  node.i0 = start;
  node.i1 = total;
  node.value = std::move(value);
  return tape_of(a).push(std::move(node));
}

Var gather_rows(Var a, std::shared_ptr<const std::vector<Eigen::Index>> index) {
  const Tensor& src = a.value();
  Tensor value(static_cast<Eigen::Index>(index->size()), src.cols());
  for (std::size_t r = 0; r < index->size(); ++r) {
    const Eigen::Index from = (*index)[r];
    if (from < 0 || from >= src.rows()) throw InvalidArgument("gather_rows: index out of range");
    value.row(static_cast<Eigen::Index>(r)) = src.row(from);
  }
  Tape::Node node;
  node.op = Op::GatherRows;
  node.in0 = a.id();
  node.index = std::move(index);
  node.value = std::move(value);
  return tape_of(a).push(std::move(node));
}

Var scatter_add_rows(Var a, std::shared_ptr<const std::vector<Eigen::Index>> index, Eigen::Index rows) {
  const Tensor& src = a.value();
  if (static_cast<Eigen::Index>(index->size()) != src.rows()) {
    throw InvalidArgument("scatter_add_rows: index length must equal row count");
  }
  Tensor value = Tensor::Zero(rows, src.cols());
  for (std::size_t r = 0; r < index->size(); ++r) {
    const Eigen::Index to = (*index)[r];
    if (to < 0 || to >= rows) throw InvalidArgument("scatter_add_rows: index out of range");
    value.row(to) += src.row(static_cast<Eigen::Index>(r));
  }
  Tape::Node node;
  node.op = Op::ScatterAddRows;
  node.in0 = a.id();
  node.i0 = rows;
  node.index = std::move(index);
  node.value = std::move(value);
  return tape_of(a).push(std::move(node));
}

}  // namespace lpi
