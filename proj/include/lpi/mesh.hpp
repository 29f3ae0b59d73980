#pragma once

#include "lpi/geom.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

namespace lpi {

using Triangle = std::array<std::uint32_t, 3>;

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::optional<std::size_t> part_id;

  bool empty() const { return triangles.empty(); }
  double triangle_area(std::size_t t) const;
  /// Unnormalized (length = 2 * area) normal following the winding.
  Vec3 triangle_normal(std::size_t t) const;
  double area() const;
  /// Divergence-theorem volume; positive for closed meshes with outward winding.
  double signed_volume() const;

  bool operator==(const TriangleMesh&) const = default;
};

/// True when every undirected edge is used by exactly two triangles with opposite directions.
bool is_watertight(const TriangleMesh& mesh);

/// Applies Normalization::invert to every vertex.
TriangleMesh denormalized(TriangleMesh mesh, const Normalization& normalization);

/// ASCII OBJ: "v x y z" lines then "f i j k" (1-based), 17 significant digits.
void write_obj(std::ostream& out, const TriangleMesh& mesh);
void write_obj(const std::filesystem::path& path, const TriangleMesh& mesh);

/// Reads v and f records; polygons are fan-triangulated, texture and normal
/// indices ignored, negative indices resolved. Throws FormatError or IoError.
TriangleMesh read_obj(std::istream& in);
TriangleMesh read_obj(const std::filesystem::path& path);

}  // namespace lpi
