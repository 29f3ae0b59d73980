#pragma once

#include "lpi/geom.hpp"
#include "lpi/mesh.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace lpi {

struct SampledSurface {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;  // unit length
  std::string source;

  std::size_t size() const { return points.size(); }
};

/// Area-weighted uniform samples with the normal of the triangle each lands on.
/// Throws EmptyMesh for a mesh without triangles and DegenerateMesh for zero total area.
SampledSurface sample_mesh(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed);

/// Mean over A of the nearest distance to B (squared when order == 2), plus the same from B to A.
double chamfer(const SampledSurface& a, const SampledSurface& b, int order);

/// Mean |cos| between each sample's normal and its nearest neighbor's normal,
/// averaged over both directions.
double normal_consistency(const SampledSurface& a, const SampledSurface& b);

/// 2PR / (P + R) with precision over A and recall over B at threshold mu (0 when P + R = 0).
double f_score(const SampledSurface& a, const SampledSurface& b, double mu);

/// Occupancy IoU of two closed meshes on a shared R^3 grid of cell centers,
/// using ray parity along z. Throws NonWatertight for open meshes.
double volumetric_iou(const TriangleMesh& a, const TriangleMesh& b, std::size_t resolution = 64);

/// Cell-center occupancy of one closed mesh over `bounds` (x fastest). Exposed for tests.
std::vector<char> occupancy(const TriangleMesh& mesh, const Box& bounds, std::size_t resolution);

}  // namespace lpi
