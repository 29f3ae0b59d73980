#include "lpi/errors.hpp"
#include "lpi/marching_cubes.hpp"
#include "lpi/metrics.hpp"
#include "lpi/shapes.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <numbers>

using namespace lpi;

namespace {

SampledSurface from_points(std::vector<Vec3> pts, const Vec3& normal = Vec3::UnitZ()) {
  SampledSurface s;
  s.normals.assign(pts.size(), normal);
  s.points = std::move(pts);
  return s;
}

std::vector<Vec3> square_grid(double z, int n = 21) {
  std::vector<Vec3> pts;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) pts.emplace_back(i / double(n - 1), j / double(n - 1), z);
  return pts;
}

TriangleMesh sphere_mesh(double r, const Vec3& c = Vec3::Zero()) {
  const Box box{Vec3::Constant(-0.5), Vec3::Constant(0.5)};
  return marching_cubes(sample_grid(64, box, [&](const Vec3& p) { return (p - c).norm() - r; }));
}

}  // namespace

TEST_CASE("surface sampling") {
  TriangleMesh tri;
  tri.vertices = {Vec3(0.1, 0.2, 0.3), Vec3(1.0, -0.5, 0.7), Vec3(-0.3, 0.9, 0.0)};
  tri.triangles = {{0, 1, 2}};
  const SampledSurface s = sample_mesh(tri, 2000, 3);
  const Vec3 n = tri.triangle_normal(0).normalized();
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(std::abs(n.dot(s.points[i] - tri.vertices[0])) < 1e-12);
    CHECK((s.normals[i] - n).norm() < 1e-12);
  }
  const SampledSurface again = sample_mesh(tri, 2000, 3);
  CHECK(again.points == s.points);
  CHECK(sample_mesh(tri, 2000, 4).points != s.points);

  // Areas 1 and 3: the larger takes 75% of samples up to 3 binomial sigmas.
  TriangleMesh two;
  two.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 2, 0), Vec3(5, 0, 0), Vec3(8, 0, 0), Vec3(5, 2, 0)};
  two.triangles = {{0, 1, 2}, {3, 4, 5}};
  const std::size_t n_samples = 10000;
  const SampledSurface ss = sample_mesh(two, n_samples, 1);
  std::size_t big = 0;
  for (const Vec3& p : ss.points) big += p.x() >= 5.0 ? 1 : 0;
  const double sigma = std::sqrt(n_samples * 0.75 * 0.25);
  CHECK(std::abs(static_cast<double>(big) - 0.75 * n_samples) <= 3 * sigma);

  CHECK_THROWS_AS(sample_mesh(TriangleMesh{}, 10, 1), EmptyMesh);
  TriangleMesh flat;
  flat.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)};
  flat.triangles = {{0, 1, 2}};
  CHECK_THROWS_AS(sample_mesh(flat, 10, 1), DegenerateMesh);
}

TEST_CASE("chamfer distance") {
  const auto a = from_points(square_grid(0.0));
  CHECK(chamfer(a, a, 2) == 0.0);
  for (double d : {0.01, 0.2}) {
    const auto b = from_points(square_grid(d));
    CHECK(chamfer(a, b, 2) == doctest::Approx(2 * d * d).epsilon(1e-12));
    CHECK(chamfer(a, b, 1) == doctest::Approx(2 * d).epsilon(1e-12));
  }
  for (std::uint64_t seed : {1u, 2u}) {
    const auto x = oracle::random_points(200, seed);
    const auto y = oracle::random_points(300, seed + 10);
    for (int order : {1, 2}) {
      CHECK(chamfer(from_points(x), from_points(y), order) ==
            doctest::Approx(oracle::chamfer(x, y, order)).epsilon(1e-12));
    }
  }
}

TEST_CASE("normal consistency") {
  const auto shape = make_sphere(0.3);
  const SampledSurface a = shape->sample(2000, 1);
  CHECK(normal_consistency(a, a) == doctest::Approx(1.0));
  SampledSurface flipped = a;
  for (auto& n : flipped.normals) n = -n;
  CHECK(normal_consistency(a, flipped) == doctest::Approx(1.0));

  // Thin strips along the x axis of two planes at 60 degrees.
  std::vector<Vec3> pa, pb;
  const double c = std::cos(std::numbers::pi / 3), s = std::sin(std::numbers::pi / 3);
  for (int i = 0; i <= 100; ++i)
    for (int j = -2; j <= 2; ++j) {
      const double x = i / 100.0, t = j * 1e-3;
      pa.emplace_back(x, t, 0.0);
      pb.emplace_back(x, t * c, t * s);
    }
  const Vec3 nb(0.0, -s, c);
  const double nc = normal_consistency(from_points(pa), from_points(pb, nb));
  CHECK(nc == doctest::Approx(0.5).epsilon(0.04));

  const SampledSurface b = make_torus()->sample(500, 2);
  const SampledSurface small_a = shape->sample(400, 3);
  CHECK(normal_consistency(small_a, b) == doctest::Approx(oracle::normal_consistency(small_a, b)).epsilon(1e-12));
}

TEST_CASE("f-score") {
  const auto a = from_points(square_grid(0.0));
  CHECK(f_score(a, a, 0.01) == 1.0);
  CHECK(f_score(a, from_points(square_grid(1.0)), 0.5) == 0.0);
  // Half of A lies within mu of B, and all of B within mu of A.
  const auto half_a = from_points({Vec3(0, 0, 0), Vec3(5, 0, 0)});
  const auto b = from_points({Vec3(0.001, 0, 0)});
  CHECK(f_score(half_a, b, 0.01) == doctest::Approx(2.0 / 3.0));
  CHECK(f_score(half_a, b, 0.01) == f_score(b, half_a, 0.01));
  const auto x = oracle::random_points(300, 4);
  const auto y = oracle::random_points(250, 5);
  CHECK(f_score(from_points(x), from_points(y), 0.1) ==
        doctest::Approx(oracle::f_score(x, y, 0.1)).epsilon(1e-12));
}

TEST_CASE("volumetric iou") {
  const TriangleMesh big = sphere_mesh(0.3);
  const TriangleMesh small = sphere_mesh(0.2);
  CHECK(volumetric_iou(big, big) == 1.0);
  CHECK(std::abs(volumetric_iou(small, big) - std::pow(0.2 / 0.3, 3)) < 0.02);
  CHECK(volumetric_iou(sphere_mesh(0.1, Vec3(-0.3, 0, 0)), sphere_mesh(0.1, Vec3(0.3, 0, 0))) == 0.0);

  TriangleMesh open = big;
  open.triangles.pop_back();
  CHECK_THROWS_AS(volumetric_iou(open, big), NonWatertight);
}
