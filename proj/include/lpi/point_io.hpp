#pragma once

#include "lpi/geom.hpp"

#include <filesystem>
#include <iosfwd>

namespace lpi {

/// Whitespace-separated "x y z [label]" rows. Blank lines and '#' comments are skipped.
/// Either every row carries a label or none does.
PointCloud read_xyz(std::istream& in);
void write_xyz(std::ostream& out, const PointCloud& cloud);

/// Binary little-endian PLY. The vertex element must provide x, y, z; an int
/// "segment" property, when present, becomes the segment label.
PointCloud read_ply(std::istream& in);
void write_ply(std::ostream& out, const PointCloud& cloud);

/// Dispatches on extension (.xyz / .ply) and validates the result.
PointCloud read_point_cloud(const std::filesystem::path& path);
void write_point_cloud(const std::filesystem::path& path, const PointCloud& cloud);

}  // namespace lpi
