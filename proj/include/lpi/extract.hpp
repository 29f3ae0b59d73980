#pragma once

#include "lpi/checkpoint.hpp"
#include "lpi/marching_cubes.hpp"
#include "lpi/mesh.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lpi {

/// Grid bounds: the cube enclosing both [-0.5, 0.5]^3 and the normalized cloud,
/// grown by 10% so every side keeps a 5% margin.
Box grid_bounds(const Checkpoint& checkpoint);

/// f(node, a(node)) at every node, evaluated in fixed-size chunks (parallel when enabled).
ScalarGrid evaluate_grid(const Checkpoint& checkpoint, const AffinityField& field, std::size_t resolution);
ScalarGrid evaluate_grid(const Checkpoint& checkpoint, std::size_t resolution);

/// How nodes outside a part's cells are filled before extracting that part.
enum class OutsideFill {
  UnseenCode,      // f(node, unseen code)
  ConstantOffset,  // kOutsideOffset
};
inline constexpr double kOutsideOffset = 0.05;
std::string_view to_string(OutsideFill fill);
OutsideFill parse_outside_fill(std::string_view name);

/// Evaluates the global grid, the outside fill and the per-node region labels
/// once, then assembles part grids from them.
class PartExtractor {
 public:
  PartExtractor(const Checkpoint& checkpoint, std::size_t resolution, OutsideFill fill = OutsideFill::ConstantOffset);

  std::size_t resolution() const { return global_.resolution; }
  std::size_t region_count() const { return region_count_; }
  OutsideFill fill() const { return fill_; }
  const ScalarGrid& global_grid() const { return global_; }
  /// Region owning each grid node (AffinityField::region_of).
  const std::vector<std::uint32_t>& node_regions() const { return regions_; }

  TriangleMesh global_mesh() const;
  /// Grid whose nodes in any of `members` keep the global value.
  ScalarGrid part_grid(std::span<const std::size_t> members) const;
  /// Throws EmptyMesh when the part has no surface.
  TriangleMesh extract(std::span<const std::size_t> members) const;
  TriangleMesh extract(std::size_t region) const;

 private:
  std::size_t region_count_ = 0;
  OutsideFill fill_;
  ScalarGrid global_;
  std::vector<double> outside_;
  std::vector<std::uint32_t> regions_;
};

TriangleMesh extract_part(const Checkpoint& checkpoint, std::size_t region, std::size_t resolution,
                          OutsideFill fill = OutsideFill::ConstantOffset);

/// Which centers survive a relevel and where the others go.
struct RelevelPlan {
  std::vector<std::size_t> kept;        // original center indices, ascending
  std::vector<std::size_t> assignment;  // original center -> position in `kept`
  std::vector<std::vector<std::size_t>> members() const;
};

/// FPS (seed 0) over the center positions picks `level` centers; each original
/// center joins the nearest kept one (lowest index on ties).
RelevelPlan plan_relevel(const RegionCenters& centers, std::size_t level);

struct MeshBundle {
  TriangleMesh global;
  /// One per kept center, part_id = original center index. Empty when that part has no surface.
  std::vector<TriangleMesh> parts;
  std::vector<TriangleMesh> hulls;
  std::vector<bool> hull_fallback;  // hull is a bounding tetrahedron
  std::string checkpoint_id;
  std::size_t resolution = 0;
  std::size_t level = 0;
  std::string affinity_mode;
  OutsideFill fill = OutsideFill::ConstantOffset;
};

/// Global mesh plus one part per kept center. level == region count gives per-center parts.
MeshBundle relevel(const Checkpoint& checkpoint, const PartExtractor& extractor, std::size_t level);
MeshBundle relevel(const Checkpoint& checkpoint, std::size_t level, std::size_t resolution,
                   OutsideFill fill = OutsideFill::ConstantOffset);

/// Fills bundle.hulls with the convex hull of each part's vertices. Parts with
/// fewer than 4 non-coplanar vertices get a flagged bounding tetrahedron.
void abstract_hulls(MeshBundle& bundle);

/// Writes global.obj, part_NNN.obj, hull_NNN.obj (when present) and manifest.json
/// into `dir`, with vertices mapped back to original coordinates.
void write_bundle(const std::filesystem::path& dir, const MeshBundle& bundle, const Normalization& normalization);

}  // namespace lpi
