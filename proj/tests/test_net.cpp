#include "lpi/implicit_net.hpp"

#include <doctest.h>

#include <random>

using namespace lpi;

namespace {

NetConfig small_net() {
  NetConfig cfg;
  cfg.hidden_layers = 4;
  cfg.hidden_width = 64;
  cfg.skip_layers = {2};
  return cfg;
}

}  // namespace

TEST_CASE("layer shapes include the skip input") {
  const ImplicitNet net(small_net(), 8, 1);
  REQUIRE(net.layer_count() == 5);
  CHECK(net.weights()[0].rows() == 64);
  CHECK(net.weights()[0].cols() == 11);
  // The layer feeding the skip leaves room for the concatenated input.
  CHECK(net.weights()[1].rows() == 64 - 11);
  CHECK(net.weights()[2].cols() == 64);
  CHECK(net.weights()[4].rows() == 1);
  CHECK(net.is_skip(2));
  CHECK(!net.is_skip(1));
  CHECK(net.parameters().size() == 10);
}

TEST_CASE("geometric initialization approximates a sphere") {
  // With a sharp softplus the init is close to |q| - r. The match is
  // statistical in the width, so use a wide net and average.
  for (double radius : {0.3, 0.2}) {
    NetConfig cfg;
    cfg.hidden_layers = 4;
    cfg.hidden_width = 256;
    cfg.skip_layers = {2};
    cfg.softplus_beta = 1000.0;
    cfg.init_radius = radius;
    const ImplicitNet net(cfg, 8, 5);
    const Eigen::VectorXd w = Eigen::VectorXd::Zero(8);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    double total = 0.0;
    int count = 0;
    for (int i = 0; i < 50; ++i) {
      Vec3 dir(g(rng), g(rng), g(rng));
      dir.normalize();
      CHECK(forward(net, 0.5 * radius * dir, w) < 0.0);
      CHECK(forward(net, 1.5 * radius * dir, w) > 0.0);
      for (double r : {0.5 * radius, radius, 1.5 * radius}) {
        total += std::abs(forward(net, r * dir, w) - (r - radius));
        ++count;
      }
    }
    CHECK(total / count < 0.04);
  }
}

TEST_CASE("default init grows outward") {
  // softplus(0) = log 2 / beta lifts the whole field by a width-dependent
  // offset, but the radial profile stays increasing.
  const ImplicitNet net(small_net(), 8, 5);
  const Eigen::VectorXd w = Eigen::VectorXd::Zero(8);
  for (const Vec3& dir : {Vec3(1, 0, 0), Vec3(0, -1, 0), Vec3(0.6, 0.0, 0.8)}) {
    double prev = forward(net, 0.1 * dir, w);
    for (double r : {0.2, 0.3, 0.4, 0.5}) {
      const double f = forward(net, r * dir, w);
      CHECK(f > prev);
      prev = f;
    }
  }
}

TEST_CASE("tape forward matches plain evaluation") {
  const ImplicitNet net(small_net(), 8, 9);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  Tensor q(20, 3), w(20, 8);
  for (Eigen::Index i = 0; i < q.size(); ++i) q.data()[i] = u(rng);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = 0.1 * u(rng);
  const Eigen::VectorXd plain = net.evaluate(q, w);
  Tape tape;
  const auto params = net.bind(tape, false);
  const Var s = net.forward(params, tape.constant(q), tape.constant(w));
  for (Eigen::Index i = 0; i < 20; ++i) CHECK(s.value()(i, 0) == doctest::Approx(plain[i]).epsilon(1e-12));
}

TEST_CASE("input gradient matches central differences") {
  const ImplicitNet net(small_net(), 8, 3);
  Eigen::VectorXd w(8);
  w << 0.01, -0.02, 0.0, 0.03, 0.01, 0.0, -0.01, 0.02;
  const double h = 1e-6;
  for (const Vec3& q : {Vec3(0.1, 0.2, -0.3), Vec3(-0.25, 0.05, 0.1), Vec3(0.4, -0.4, 0.0)}) {
    const Vec3 g = input_gradient(net, q, w);
    for (int k = 0; k < 3; ++k) {
      Vec3 e = Vec3::Zero();
      e[k] = h;
      const double fd = (forward(net, q + e, w) - forward(net, q - e, w)) / (2 * h);
      CHECK(g[k] == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("blended codes and initial codes") {
  const Tensor codes = init_surface_codes(3, 4, 0.5, 11);
  CHECK(codes.rows() == 3);
  CHECK(codes.cols() == 4);
  CHECK(codes == init_surface_codes(3, 4, 0.5, 11));
  CHECK(codes != init_surface_codes(3, 4, 0.5, 12));
  Tensor a(2, 3);
  a << 1, 0, 0, 0.25, 0.25, 0.5;
  Tape tape;
  const Var w = blend_codes(tape.constant(a), tape.variable(codes));
  CHECK((w.value().row(0) - codes.row(0)).norm() == 0.0);
  CHECK((w.value().row(1) - (0.25 * codes.row(0) + 0.25 * codes.row(1) + 0.5 * codes.row(2))).norm() < 1e-15);
}

TEST_CASE("restoring from parts checks shapes") {
  const ImplicitNet net(small_net(), 8, 1);
  CHECK(ImplicitNet::from_parts(net.config(), 8, net.weights(), net.biases()) == net);
  auto weights = net.weights();
  weights[1] = Tensor::Zero(3, 3);
  CHECK_THROWS(ImplicitNet::from_parts(net.config(), 8, weights, net.biases()));
}
