#include "lpi/convex_hull.hpp"

#include "lpi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

namespace lpi {

namespace {

bool lex_less(const Vec3& a, const Vec3& b) {
  if (a.x() != b.x()) return a.x() < b.x();
  if (a.y() != b.y()) return a.y() < b.y();
  return a.z() < b.z();
}

struct Face {
  std::array<std::size_t, 3> v;
  Vec3 normal;  // unit
  double offset;
  bool alive = true;
};

Face make_face(const std::vector<Vec3>& p, std::size_t a, std::size_t b, std::size_t c) {
  Face f;
  f.v = {a, b, c};
  f.normal = (p[b] - p[a]).cross(p[c] - p[a]).normalized();
  f.offset = f.normal.dot(p[a]);
  return f;
}

}  // namespace

TriangleMesh convex_hull(std::span<const Vec3> input) {
  std::vector<Vec3> p(input.begin(), input.end());
  std::sort(p.begin(), p.end(), lex_less);
  p.erase(std::unique(p.begin(), p.end()), p.end());
  if (p.size() < 4) throw DegeneratePart("convex hull needs at least 4 distinct points");

  const Box box = bounding_box(p);
  const double scale = std::max(box.extent().maxCoeff(), 1e-300);
  const double eps = 1e-10 * scale;

  // Initial simplex: first point, farthest point, farthest from their line, farthest from their plane.
  const std::size_t i0 = 0;
  std::size_t i1 = 0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if ((p[i] - p[i0]).squaredNorm() > (p[i1] - p[i0]).squaredNorm()) i1 = i;
  }
  const Vec3 dir = (p[i1] - p[i0]).normalized();
  std::size_t i2 = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = (p[i] - p[i0]).cross(dir).norm();
    if (d > best) {
      best = d;
      i2 = i;
    }
  }
  if (best <= eps) throw DegeneratePart("points are collinear");
  const Vec3 plane = (p[i1] - p[i0]).cross(p[i2] - p[i0]).normalized();
  std::size_t i3 = 0;
  best = -1.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = std::abs(plane.dot(p[i] - p[i0]));
    if (d > best) {
      best = d;
      i3 = i;
    }
  }
  if (best <= eps) throw DegeneratePart("points are coplanar");

  std::vector<Face> faces;
  const Vec3 inside = (p[i0] + p[i1] + p[i2] + p[i3]) / 4.0;
  auto add_face = [&](std::size_t a, std::size_t b, std::size_t c) {
    Face f = make_face(p, a, b, c);
    if (f.normal.dot(inside) - f.offset > 0.0) f = make_face(p, a, c, b);
    faces.push_back(f);
  };
  add_face(i0, i1, i2);
  add_face(i0, i1, i3);
  add_face(i0, i2, i3);
  add_face(i1, i2, i3);

  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i == i0 || i == i1 || i == i2 || i == i3) continue;
    std::vector<std::size_t> visible;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (faces[f].alive && faces[f].normal.dot(p[i]) - faces[f].offset > eps) visible.push_back(f);
    }
    if (visible.empty()) continue;
    // Horizon: directed edges of visible faces whose reverse is not on a visible face.
    std::map<std::pair<std::size_t, std::size_t>, int> edges;
    for (auto f : visible) {
      faces[f].alive = false;
      for (int e = 0; e < 3; ++e) edges[{faces[f].v[static_cast<std::size_t>(e)], faces[f].v[static_cast<std::size_t>((e + 1) % 3)]}] += 1;
    }
    for (const auto& [edge, count] : edges) {
      if (edges.count({edge.second, edge.first}) != 0) continue;
      faces.push_back(make_face(p, edge.first, edge.second, i));
    }
  }

  TriangleMesh mesh;
  std::vector<std::int64_t> remap(p.size(), -1);
  for (const auto& f : faces) {
    if (!f.alive) continue;
    Triangle t{};
    for (int c = 0; c < 3; ++c) {
      const std::size_t v = f.v[static_cast<std::size_t>(c)];
      if (remap[v] < 0) {
        remap[v] = static_cast<std::int64_t>(mesh.vertices.size());
        mesh.vertices.push_back(p[v]);
      }
      t[static_cast<std::size_t>(c)] = static_cast<std::uint32_t>(remap[v]);
    }
    mesh.triangles.push_back(t);
  }
  return mesh;
}

TriangleMesh bounding_tetrahedron(std::span<const Vec3> points) {
  Box box;
  if (!points.empty()) box = bounding_box(points);
  const double s = std::max(box.extent().maxCoeff(), 1e-6);
  // The simplex x + y + z <= 3s anchored at lo contains the cube [lo, lo + s].
  TriangleMesh mesh;
  mesh.vertices = {box.lo, box.lo + Vec3(3 * s, 0, 0), box.lo + Vec3(0, 3 * s, 0), box.lo + Vec3(0, 0, 3 * s)};
  mesh.triangles = {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}};
  return mesh;
}

}  // namespace lpi
