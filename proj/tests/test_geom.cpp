#include "oracles.hpp"

#include "lpi/errors.hpp"
#include "lpi/geom.hpp"
#include "lpi/point_io.hpp"
#include "lpi/spatial_index.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>

using namespace lpi;

TEST_CASE("normalize scales the largest extent to one") {
  PointCloud c;
  c.points = {{0, 0, 0}, {2, 0, 0}, {0, 2, 0}, {0, 0, 2}};
  const auto [n, t] = normalize(c);
  CHECK(t.scale == doctest::Approx(2.0));
  const Box b = bounding_box(n.points);
  CHECK(b.extent().maxCoeff() == doctest::Approx(1.0));
  Vec3 centroid = Vec3::Zero();
  for (const auto& p : n.points) centroid += p;
  CHECK((centroid / 4.0).norm() < 1e-15);
}

TEST_CASE("normalize round trip and idempotence") {
  PointCloud c;
  c.points = oracle::random_points(100, 3, 5.0);
  const auto [n, t] = normalize(c);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK((t.invert(n.points[i]) - c.points[i]).norm() < 1e-12);
  const auto [n2, t2] = normalize(n);
  CHECK(t2.scale == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t2.offset.norm() < 1e-12);
}

TEST_CASE("normalize rejects a cloud of identical points") {
  PointCloud c;
  c.points.assign(5, Vec3(1, 2, 3));
  CHECK_THROWS_AS(normalize(c), DegenerateInput);
}

TEST_CASE("farthest point sampling") {
  SUBCASE("unit square corners") {
    const std::vector<Vec3> p = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}};
    // seed 4 selects index 4 mod 4 = 0
    const auto c = farthest_point_sample(p, 2, 4);
    REQUIRE(c.size() == 2);
    CHECK(c.source_indices[0] == 0);
    CHECK(c.source_indices[1] == 3);
  }
  SUBCASE("I = N selects every point") {
    const auto p = oracle::random_points(12, 1);
    auto c = farthest_point_sample(p, 12, 0);
    std::sort(c.source_indices.begin(), c.source_indices.end());
    for (std::size_t i = 0; i < 12; ++i) CHECK(c.source_indices[i] == i);
  }
  SUBCASE("matches the greedy reference") {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto p = oracle::random_points(50, 100 + s);
      const auto c = farthest_point_sample(p, 8, s + 1);
      CHECK(c.source_indices == oracle::fps(p, 8, (s + 1) % 50));
    }
  }
  SUBCASE("seed 0 starts nearest the centroid") {
    const auto p = oracle::random_points(40, 9);
    Vec3 centroid = Vec3::Zero();
    for (const auto& q : p) centroid += q;
    centroid /= 40.0;
    CHECK(farthest_point_sample(p, 1, 0).source_indices[0] == oracle::nearest(p, centroid).first);
  }
  SUBCASE("too many centers") {
    const auto p = oracle::random_points(5, 2);
    CHECK_THROWS_AS(farthest_point_sample(p, 6, 0), InvalidArgument);
  }
}

TEST_CASE("k-d tree agrees with a linear scan") {
  const auto pts = oracle::random_points(500, 11);
  const SpatialIndex index(pts);
  const auto queries = oracle::random_points(1000, 12, 1.5);
  for (const auto& q : queries) {
    const auto nn = index.nearest(q);
    const auto ref = oracle::nearest(pts, q);
    CHECK(nn.index == ref.first);
    CHECK(nn.distance == ref.second);
  }
  SUBCASE("knn order and self exclusion") {
    const auto nn = index.knn(pts[7], 5, 7);
    REQUIRE(nn.size() == 5);
    for (const auto& n : nn) CHECK(n.index != 7);
    for (std::size_t i = 1; i < nn.size(); ++i) CHECK(nn[i - 1].distance <= nn[i].distance);
  }
  SUBCASE("coincident query and ties") {
    CHECK(index.nearest(pts[3]).index == 3);
    CHECK(index.nearest(pts[3]).distance == 0.0);
    const std::vector<Vec3> dup = {{1, 0, 0}, {0, 0, 0}, {1, 0, 0}};
    CHECK(SpatialIndex(dup).nearest(Vec3(2, 0, 0)).index == 0);
  }
}

TEST_CASE("point cloud files round trip") {
  PointCloud c;
  c.points = oracle::random_points(20, 5);
  for (int i = 0; i < 20; ++i) c.segment_labels.push_back(i % 3);
  SUBCASE("xyz") {
    std::stringstream ss;
    write_xyz(ss, c);
    const PointCloud r = read_xyz(ss);
    CHECK(r.points == c.points);
    CHECK(r.segment_labels == c.segment_labels);
  }
  SUBCASE("ply") {
    std::stringstream ss;
    write_ply(ss, c);
    const PointCloud r = read_ply(ss);
    CHECK(r.segment_labels == c.segment_labels);
    for (std::size_t i = 0; i < 20; ++i) CHECK((r.points[i] - c.points[i]).norm() < 1e-6);
  }
  SUBCASE("malformed text") {
    std::stringstream ss("0 0 0\n1 1\n");
    CHECK_THROWS_AS(read_xyz(ss), FormatError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_point_cloud("/nonexistent/cloud.xyz"), IoError);
  }
}
