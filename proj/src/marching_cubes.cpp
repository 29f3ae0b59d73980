#include "lpi/marching_cubes.hpp"

#include "lpi/errors.hpp"
#include "lpi/parallel.hpp"
#include "mc_tables.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace lpi {

ScalarGrid::ScalarGrid(std::size_t r, const Box& b) : resolution(r), bounds(b) {
  if (r < 2) throw InvalidArgument("grid resolution must be at least 2");
  values.assign(r * r * r, 0.0);
}

Vec3 ScalarGrid::spacing() const { return bounds.extent() / static_cast<double>(resolution - 1); }

Vec3 ScalarGrid::node(std::size_t i, std::size_t j, std::size_t k) const {
  const double d = static_cast<double>(resolution - 1);
  const Vec3 e = bounds.extent();
  return {bounds.lo.x() + e.x() * (static_cast<double>(i) / d), bounds.lo.y() + e.y() * (static_cast<double>(j) / d),
          bounds.lo.z() + e.z() * (static_cast<double>(k) / d)};
}

Vec3 ScalarGrid::node(std::size_t flat) const {
  const std::size_t i = flat % resolution;
  const std::size_t j = (flat / resolution) % resolution;
  return node(i, j, flat / (resolution * resolution));
}

namespace {

// Corner c of a cell sits at (i, j, k) + kCorner[c].
constexpr std::array<std::array<int, 3>, 8> kCorner = {{
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
}};
constexpr std::array<std::array<int, 2>, 12> kEdgeCorners = {{
    {0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6}, {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7},
}};

struct EdgeKey {
  std::size_t node;  // lower endpoint
  int axis;
};

EdgeKey cell_edge(std::size_t i, std::size_t j, std::size_t k, int edge, const ScalarGrid& g) {
  const auto& a = kCorner[static_cast<std::size_t>(kEdgeCorners[static_cast<std::size_t>(edge)][0])];
  const auto& b = kCorner[static_cast<std::size_t>(kEdgeCorners[static_cast<std::size_t>(edge)][1])];
  std::array<int, 3> lo{};
  int axis = 0;
  for (int d = 0; d < 3; ++d) {
    lo[static_cast<std::size_t>(d)] = std::min(a[static_cast<std::size_t>(d)], b[static_cast<std::size_t>(d)]);
    if (a[static_cast<std::size_t>(d)] != b[static_cast<std::size_t>(d)]) axis = d;
  }
  return {g.index(i + static_cast<std::size_t>(lo[0]), j + static_cast<std::size_t>(lo[1]),
                  k + static_cast<std::size_t>(lo[2])),
          axis};
}

std::size_t find(std::vector<std::uint32_t>& parent, std::uint32_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

// Collapses zero-area triangles by merging the endpoints of their shortest edge,
// then drops triangles that lost a vertex and unreferenced vertices.
void collapse_degenerate(TriangleMesh& mesh) {
  std::vector<std::uint32_t> parent(mesh.vertices.size());
  std::iota(parent.begin(), parent.end(), 0u);
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto& tri : mesh.triangles) {
      std::array<std::uint32_t, 3> v{};
      for (int c = 0; c < 3; ++c) v[static_cast<std::size_t>(c)] = static_cast<std::uint32_t>(find(parent, tri[static_cast<std::size_t>(c)]));
      tri = v;
      if (v[0] == v[1] || v[1] == v[2] || v[0] == v[2]) continue;
      const Vec3& a = mesh.vertices[v[0]];
      const Vec3& b = mesh.vertices[v[1]];
      const Vec3& c = mesh.vertices[v[2]];
      if (0.5 * (b - a).cross(c - a).norm() > kDegenerateArea) continue;
      const std::array<double, 3> len = {(b - a).squaredNorm(), (c - b).squaredNorm(), (a - c).squaredNorm()};
      const auto e = static_cast<std::size_t>(std::min_element(len.begin(), len.end()) - len.begin());
      const std::uint32_t p = v[e];
      const std::uint32_t q = v[(e + 1) % 3];
      parent[std::max(p, q)] = std::min(p, q);
      changed = true;
    }
  }
  std::vector<Triangle> kept;
  kept.reserve(mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    if (t[0] != t[1] && t[1] != t[2] && t[0] != t[2]) kept.push_back(t);
  }
  std::vector<std::int64_t> remap(mesh.vertices.size(), -1);
  std::vector<Vec3> vertices;
  for (auto& t : kept) {
    for (auto& v : t) {
      if (remap[v] < 0) {
        remap[v] = static_cast<std::int64_t>(vertices.size());
        vertices.push_back(mesh.vertices[v]);
      }
      v = static_cast<std::uint32_t>(remap[v]);
    }
  }
  mesh.vertices = std::move(vertices);
  mesh.triangles = std::move(kept);
}

}  // namespace

TriangleMesh marching_cubes(const ScalarGrid& grid, double iso) {
  const std::size_t r = grid.resolution;
  if (r < 2 || grid.values.size() != r * r * r) throw InvalidArgument("grid value count does not match resolution");
  std::vector<double> v(grid.values.size());
  for (std::size_t n = 0; n < v.size(); ++n) {
    const double x = grid.values[n];
    if (!std::isfinite(x)) throw InvalidArgument("grid contains non-finite values");
    v[n] = x == iso ? iso + kZeroPerturbation : x;
  }

  // Each slab of cells emits triangles as triples of edge keys (node * 3 + axis).
  const std::size_t cells = r - 1;
  std::vector<std::vector<std::array<std::uint64_t, 3>>> slabs(cells);
  parallel_for(cells, 1, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      auto& out = slabs[k];
      for (std::size_t j = 0; j < cells; ++j) {
        for (std::size_t i = 0; i < cells; ++i) {
          int cube = 0;
          for (int c = 0; c < 8; ++c) {
            const auto& o = kCorner[static_cast<std::size_t>(c)];
            if (v[grid.index(i + static_cast<std::size_t>(o[0]), j + static_cast<std::size_t>(o[1]),
                             k + static_cast<std::size_t>(o[2]))] < iso) {
              cube |= 1 << c;
            }
          }
          if (detail::kEdgeTable[cube] == 0) continue;
          const signed char* row = detail::kTriTable[cube];
          for (int t = 0; row[t] != -1; t += 3) {
            std::array<std::uint64_t, 3> tri{};
            for (int c = 0; c < 3; ++c) {
              const EdgeKey e = cell_edge(i, j, k, row[t + c], grid);
              tri[static_cast<std::size_t>(c)] = static_cast<std::uint64_t>(e.node) * 3 + static_cast<std::uint64_t>(e.axis);
            }
            // The table winds toward the low side; flip so normals face increasing values.
            std::swap(tri[1], tri[2]);
            out.push_back(tri);
          }
        }
      }
    }
  });

  std::vector<std::uint64_t> keys;
  for (const auto& slab : slabs) {
    for (const auto& tri : slab) keys.insert(keys.end(), tri.begin(), tri.end());
  }
  if (keys.empty()) throw EmptyMesh("grid has no crossing of the isolevel");
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

  TriangleMesh mesh;
  mesh.vertices.resize(keys.size());
  const std::size_t stride[3] = {1, r, r * r};
  for (std::size_t n = 0; n < keys.size(); ++n) {
    const std::size_t a = static_cast<std::size_t>(keys[n] / 3);
    const std::size_t b = a + stride[keys[n] % 3];
    const double t = (iso - v[a]) / (v[b] - v[a]);
    const Vec3 pa = grid.node(a);
    mesh.vertices[n] = pa + t * (grid.node(b) - pa);
  }
  for (const auto& slab : slabs) {
    for (const auto& tri : slab) {
      Triangle out{};
      for (int c = 0; c < 3; ++c) {
        out[static_cast<std::size_t>(c)] = static_cast<std::uint32_t>(
            std::lower_bound(keys.begin(), keys.end(), tri[static_cast<std::size_t>(c)]) - keys.begin());
      }
      mesh.triangles.push_back(out);
    }
  }
  collapse_degenerate(mesh);
  if (mesh.empty()) throw EmptyMesh("isosurface collapsed to nothing");
  return mesh;
}

}  // namespace lpi
