#pragma once

#include "lpi/geom.hpp"
#include "lpi/mesh.hpp"

#include <span>

namespace lpi {

/// 3D convex hull with outward-wound triangles. Output vertices are the hull's
/// extreme points, copied from the input. Points are processed in
/// lexicographic order, so duplicates and ties resolve the same way every run.
/// Throws DegeneratePart when fewer than 4 non-coplanar points exist.
TriangleMesh convex_hull(std::span<const Vec3> points);

/// Tetrahedron enclosing the bounding box of `points`; used when a hull is degenerate.
TriangleMesh bounding_tetrahedron(std::span<const Vec3> points);

}  // namespace lpi
