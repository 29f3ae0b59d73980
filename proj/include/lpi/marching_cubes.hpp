#pragma once

#include "lpi/geom.hpp"
#include "lpi/mesh.hpp"

#include <cstddef>
#include <vector>

namespace lpi {

/// Values sampled at R x R x R nodes spanning `bounds` (nodes sit on the box faces).
struct ScalarGrid {
  std::size_t resolution = 0;
  Box bounds;
  std::vector<double> values;  // x fastest, then y, then z

  ScalarGrid() = default;
  ScalarGrid(std::size_t resolution, const Box& bounds);

  std::size_t node_count() const { return values.size(); }
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const { return (k * resolution + j) * resolution + i; }
  double& at(std::size_t i, std::size_t j, std::size_t k) { return values[index(i, j, k)]; }
  double at(std::size_t i, std::size_t j, std::size_t k) const { return values[index(i, j, k)]; }
  Vec3 spacing() const;
  Vec3 node(std::size_t i, std::size_t j, std::size_t k) const;
  Vec3 node(std::size_t flat) const;
  double cell_diagonal() const { return spacing().norm(); }
};

/// Fills a grid by calling sdf at every node (serially).
template <typename F>
ScalarGrid sample_grid(std::size_t resolution, const Box& bounds, F&& sdf) {
  ScalarGrid grid(resolution, bounds);
  for (std::size_t n = 0; n < grid.node_count(); ++n) grid.values[n] = sdf(grid.node(n));
  return grid;
}

/// Values exactly equal to the isolevel are nudged by this amount before triangulation.
inline constexpr double kZeroPerturbation = 1e-10;
/// Triangles at or below this area are collapsed away.
inline constexpr double kDegenerateArea = 1e-12;

/// Isosurface of the grid with vertices welded along shared cell edges.
/// Triangles wind so their normals point toward increasing values.
/// Throws EmptyMesh when the grid never crosses `iso`.
TriangleMesh marching_cubes(const ScalarGrid& grid, double iso = 0.0);

}  // namespace lpi
