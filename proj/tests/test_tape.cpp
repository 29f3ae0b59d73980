#include "lpi/errors.hpp"
#include "lpi/tape.hpp"

#include <doctest.h>

#include <functional>
#include <memory>
#include <random>

using namespace lpi;

namespace {

using Build = std::function<Var(std::vector<Var>&)>;

Tensor random_tensor(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(r, c);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = u(rng);
  return t;
}

double evaluate(const Build& build, const std::vector<Tensor>& inputs) {
  Tape tape;
  std::vector<Var> vars;
  for (const auto& t : inputs) vars.push_back(tape.variable(t));
  return build(vars).value()(0, 0);
}

// Max relative error between tape gradients and central differences over every input entry.
double gradient_error(const Build& build, std::vector<Tensor> inputs, double h = 1e-6) {
  Tape tape;
  std::vector<Var> vars;
  for (const auto& t : inputs) vars.push_back(tape.variable(t));
  const Var y = build(vars);
  const auto grads = tape.grad(y, vars);
  double worst = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    for (Eigen::Index i = 0; i < inputs[k].size(); ++i) {
      const double x0 = inputs[k].data()[i];
      inputs[k].data()[i] = x0 + h;
      const double fp = evaluate(build, inputs);
      inputs[k].data()[i] = x0 - h;
      const double fm = evaluate(build, inputs);
      inputs[k].data()[i] = x0;
      const double fd = (fp - fm) / (2 * h);
      const double g = grads[k].value().data()[i];
      worst = std::max(worst, std::abs(fd - g) / std::max(1.0, std::abs(fd)));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("first-order gradients match central differences") {
  std::mt19937_64 rng(7);
  const Tensor a = random_tensor(4, 3, rng);
  const Tensor b = random_tensor(3, 5, rng);
  const Tensor c = random_tensor(4, 3, rng);
  const Tensor pos = random_tensor(4, 3, rng, 0.5, 2.0);
  const Tensor row = random_tensor(1, 3, rng);
  const Tensor col = random_tensor(4, 1, rng);
  auto idx = std::make_shared<const std::vector<Eigen::Index>>(std::vector<Eigen::Index>{2, 0, 2, 3});

  CHECK(gradient_error([](auto& v) { return sum_all(square(matmul(v[0], v[1]))); }, {a, b}) < 1e-7);
  CHECK(gradient_error([](auto& v) { return sum_all(square(matmul(v[0], v[1], true, false))); }, {c, a}) < 1e-7);
  CHECK(gradient_error([](auto& v) { return sum_all(square(matmul(v[0], v[1], false, true))); }, {a, c}) < 1e-7);
  CHECK(gradient_error([](auto& v) { return sum_all(square(matmul(v[0], v[1], true, true))); },
                       {b, a}) < 1e-7);
  CHECK(gradient_error([](auto& v) { return sum_all(v[0] * v[1] + v[0] - v[1]); }, {a, c}) < 1e-7);
  CHECK(gradient_error([](auto& v) { return sum_all(v[0] / v[1]); }, {a, pos}) < 1e-7);
  CHECK(gradient_error([](auto& v) { return sum_all(square(-affine(v[0], 2.5, -1.0))); }, {a}) < 1e-7);
  CHECK(gradient_error([](auto& v) { return sum_all(square(add_row(v[0], v[1]))); }, {a, row}) < 1e-7);
  CHECK(gradient_error([](auto& v) { return sum_all(square(mul_col(v[0], v[1]))); }, {a, col}) < 1e-7);
  CHECK(gradient_error([](auto& v) { return sum_all(square(sum_rows(v[0]))) + sum_all(square(sum_cols(v[0]))); },
                       {a}) < 1e-7);
  CHECK(gradient_error(
            [](auto& v) {
              return sum_all(square(broadcast_rows(v[0], 3))) + sum_all(square(broadcast_cols(v[1], 2))) +
                     sum_all(square(broadcast_scalar(sum_all(v[1]), 2, 2)));
            },
            {row, col}) < 1e-7);
  CHECK(gradient_error([](auto& v) { return sum_all(softplus(v[0], 100.0)); }, {a}, 1e-7) < 1e-5);
  CHECK(gradient_error([](auto& v) { return sum_all(softplus(v[0], 3.0) * sigmoid(v[0], 3.0)); }, {a}) < 1e-7);
  CHECK(gradient_error([](auto& v) { return sum_all(sqrt(v[0])); }, {pos}) < 1e-7);
  CHECK(gradient_error(
            [](auto& v) { return sum_all(square(concat_cols(v[0], v[1]))) + sum_all(square(slice_cols(v[0], 1, 2))); },
            {a, c}) < 1e-7);
  CHECK(gradient_error([](auto& v) { return sum_all(square(pad_cols(v[0], 2, 7))); }, {a}) < 1e-7);
  CHECK(gradient_error([idx](auto& v) { return sum_all(square(gather_rows(v[0], idx))); }, {a}) < 1e-7);
  CHECK(gradient_error([idx](auto& v) { return sum_all(square(scatter_add_rows(v[0], idx, 5))); }, {a}) < 1e-7);
}

TEST_CASE("second-order gradients through grad()") {
  // z(W, x) = sum(|d/dx sum(softplus(x W))|^2): differentiating z needs the
  // VJPs themselves to be recorded.
  std::mt19937_64 rng(3);
  const Tensor x = random_tensor(5, 3, rng);
  const Tensor w = random_tensor(3, 4, rng);
  const Build z = [](std::vector<Var>& v) {
    Tape& tape = *v[0].tape();
    const Var y = sum_all(softplus(matmul(v[0], v[1]), 4.0));
    const Var wrt[1] = {v[0]};
    const Var g = tape.grad(y, wrt, true)[0];
    return sum_all(square(g));
  };
  CHECK(gradient_error(z, {x, w}) < 1e-6);

  SUBCASE("seeded gradient") {
    const Build zs = [](std::vector<Var>& v) {
      Tape& tape = *v[0].tape();
      const Var s = softplus(matmul(v[0], v[1]), 2.0);
      const Var seed = tape.constant(Tensor::Ones(s.rows(), s.cols()));
      const Var wrt[1] = {v[0]};
      const Var g = tape.grad(s, seed, wrt, true)[0];
      return sum_all(sqrt(sum_cols(square(g))));
    };
    CHECK(gradient_error(zs, {x, w}) < 1e-6);
  }
}

TEST_CASE("tape bookkeeping") {
  Tape tape;
  const Var a = tape.variable(Tensor::Constant(2, 2, 3.0));
  const Var b = tape.constant(Tensor::Constant(2, 2, 5.0));
  const Var unused = tape.variable(Tensor::Constant(1, 3, 1.0));
  const Var y = sum_all(a * b);
  const Var wrt[2] = {a, unused};
  const auto g = tape.grad(y, wrt);
  CHECK(g[0].value() == Tensor::Constant(2, 2, 5.0));
  CHECK(g[1].value() == Tensor::Zero(1, 3));
  CHECK(!b.requires_grad());
  CHECK(y.requires_grad());
  // Without create_graph the results are detached.
  CHECK(!g[0].requires_grad());

  SUBCASE("finite checking") {
    tape.set_check_finite(true);
    const Var neg = tape.constant(Tensor::Constant(1, 1, -1.0));
    CHECK_THROWS_AS(sqrt(neg), NumericalError);
  }
  SUBCASE("non-scalar output needs a seed") {
    const Var both[1] = {a};
    CHECK_THROWS_AS(tape.grad(a * b, both), InvalidArgument);
  }
}

TEST_CASE("stable scalar softplus and sigmoid") {
  CHECK(softplus_value(1000.0, 100.0) == doctest::Approx(1000.0));
  CHECK(softplus_value(-1000.0, 100.0) >= 0.0);
  CHECK(softplus_value(0.0, 100.0) == doctest::Approx(std::log(2.0) / 100.0));
  CHECK(sigmoid_value(-1e4, 1.0) == 0.0);
  CHECK(sigmoid_value(0.0, 5.0) == 0.5);
}
