#include "lpi/extract.hpp"

#include "lpi/convex_hull.hpp"
#include "lpi/errors.hpp"
#include "lpi/parallel.hpp"
#include "lpi/spatial_index.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>

namespace lpi {

namespace {

constexpr std::size_t kGridChunk = 1024;

Tensor node_block(const ScalarGrid& grid, std::size_t begin, std::size_t end) {
  Tensor q(static_cast<Eigen::Index>(end - begin), 3);
  for (std::size_t n = begin; n < end; ++n) q.row(static_cast<Eigen::Index>(n - begin)) = grid.node(n).transpose();
  return q;
}

std::vector<Vec3> node_points(const ScalarGrid& grid, std::size_t begin, std::size_t end) {
  std::vector<Vec3> out;
  out.reserve(end - begin);
  for (std::size_t n = begin; n < end; ++n) out.push_back(grid.node(n));
  return out;
}

}  // namespace

Box grid_bounds(const Checkpoint& checkpoint) {
  Box box{Vec3::Constant(-0.5), Vec3::Constant(0.5)};
  if (checkpoint.cloud.size() > 0) {
    const Box cloud = bounding_box(checkpoint.cloud.points);
    box.lo = box.lo.cwiseMin(cloud.lo);
    box.hi = box.hi.cwiseMax(cloud.hi);
  }
  const Vec3 center = 0.5 * (box.lo + box.hi);
  const double half = 0.5 * box.extent().maxCoeff() * 1.1;
  return {center - Vec3::Constant(half), center + Vec3::Constant(half)};
}

ScalarGrid evaluate_grid(const Checkpoint& checkpoint, const AffinityField& field, std::size_t resolution) {
  ScalarGrid grid(resolution, grid_bounds(checkpoint));
  parallel_for(grid.node_count(), kGridChunk, [&](std::size_t begin, std::size_t end) {
    const Tensor affinity = field.affinities(node_points(grid, begin, end));
    const Tensor latents = affinity * checkpoint.codes;
    const Eigen::VectorXd f = checkpoint.net.evaluate(node_block(grid, begin, end), latents);
    for (std::size_t n = begin; n < end; ++n) grid.values[n] = f[static_cast<Eigen::Index>(n - begin)];
  });
  return grid;
}

ScalarGrid evaluate_grid(const Checkpoint& checkpoint, std::size_t resolution) {
  return evaluate_grid(checkpoint, make_affinity_field(checkpoint), resolution);
}

std::string_view to_string(OutsideFill fill) {
  return fill == OutsideFill::UnseenCode ? "unseen-code" : "constant";
}

OutsideFill parse_outside_fill(std::string_view name) {
  if (name == "unseen-code") return OutsideFill::UnseenCode;
  if (name == "constant") return OutsideFill::ConstantOffset;
  throw InvalidArgument("unknown outside fill '" + std::string(name) + "'");
}

PartExtractor::PartExtractor(const Checkpoint& checkpoint, std::size_t resolution, OutsideFill fill)
    : region_count_(checkpoint.region_count()), fill_(fill) {
  const AffinityField field = make_affinity_field(checkpoint);
  global_ = evaluate_grid(checkpoint, field, resolution);
  const std::size_t n = global_.node_count();
  regions_.resize(n);
  outside_.assign(n, kOutsideOffset);
  parallel_for(n, kGridChunk, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) regions_[i] = static_cast<std::uint32_t>(field.region_of(global_.node(i)));
    if (fill_ == OutsideFill::UnseenCode) {
      const Tensor latents = checkpoint.unseen_code.replicate(static_cast<Eigen::Index>(end - begin), 1);
      const Eigen::VectorXd f = checkpoint.net.evaluate(node_block(global_, begin, end), latents);
      for (std::size_t i = begin; i < end; ++i) outside_[i] = f[static_cast<Eigen::Index>(i - begin)];
    }
  });
}

TriangleMesh PartExtractor::global_mesh() const { return marching_cubes(global_); }

ScalarGrid PartExtractor::part_grid(std::span<const std::size_t> members) const {
  std::vector<char> in(region_count_, 0);
  for (auto m : members) {
    if (m >= region_count_) throw InvalidArgument("part index " + std::to_string(m) + " out of range");
    in[m] = 1;
  }
  ScalarGrid grid = global_;
  for (std::size_t i = 0; i < grid.node_count(); ++i) {
    if (!in[regions_[i]]) grid.values[i] = outside_[i];
  }
  return grid;
}

TriangleMesh PartExtractor::extract(std::span<const std::size_t> members) const {
  return marching_cubes(part_grid(members));
}

TriangleMesh PartExtractor::extract(std::size_t region) const {
  const std::size_t members[1] = {region};
  TriangleMesh mesh = extract(members);
  mesh.part_id = region;
  return mesh;
}

TriangleMesh extract_part(const Checkpoint& checkpoint, std::size_t region, std::size_t resolution,
                          OutsideFill fill) {
  if (region >= checkpoint.region_count()) throw InvalidArgument("part index out of range");
  return PartExtractor(checkpoint, resolution, fill).extract(region);
}

std::vector<std::vector<std::size_t>> RelevelPlan::members() const {
  std::vector<std::vector<std::size_t>> out(kept.size());
  for (std::size_t i = 0; i < assignment.size(); ++i) out[assignment[i]].push_back(i);
  return out;
}

RelevelPlan plan_relevel(const RegionCenters& centers, std::size_t level) {
  if (level < 1 || level > centers.size()) {
    throw InvalidArgument("level must lie in [1, " + std::to_string(centers.size()) + "]");
  }
  RelevelPlan plan;
  if (level == centers.size()) {
    for (std::size_t i = 0; i < level; ++i) plan.kept.push_back(i);
  } else {
    plan.kept = farthest_point_sample(std::span<const Vec3>(centers.centers), level, 0).source_indices;
    std::sort(plan.kept.begin(), plan.kept.end());
  }
  plan.assignment.resize(centers.size());
  for (std::size_t i = 0; i < centers.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < plan.kept.size(); ++k) {
      if ((centers.centers[i] - centers.centers[plan.kept[k]]).squaredNorm() <
          (centers.centers[i] - centers.centers[plan.kept[best]]).squaredNorm()) {
        best = k;
      }
    }
    plan.assignment[i] = best;
  }
  return plan;
}

MeshBundle relevel(const Checkpoint& checkpoint, const PartExtractor& extractor, std::size_t level) {
  const RelevelPlan plan = plan_relevel(checkpoint.centers, level);
  MeshBundle bundle;
  bundle.global = extractor.global_mesh();
  const auto members = plan.members();
  for (std::size_t k = 0; k < plan.kept.size(); ++k) {
    TriangleMesh part;
    try {
      part = extractor.extract(members[k]);
    } catch (const EmptyMesh&) {
    }
    part.part_id = plan.kept[k];
    bundle.parts.push_back(std::move(part));
  }
  bundle.checkpoint_id = checkpoint_id(checkpoint);
  bundle.resolution = extractor.resolution();
  bundle.level = level;
  bundle.affinity_mode = std::string(to_string(checkpoint.affinity.mode));
  bundle.fill = extractor.fill();
  return bundle;
}

MeshBundle relevel(const Checkpoint& checkpoint, std::size_t level, std::size_t resolution, OutsideFill fill) {
  return relevel(checkpoint, PartExtractor(checkpoint, resolution, fill), level);
}

void abstract_hulls(MeshBundle& bundle) {
  bundle.hulls.assign(bundle.parts.size(), TriangleMesh{});
  bundle.hull_fallback.assign(bundle.parts.size(), false);
  parallel_for(bundle.parts.size(), 1, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& part = bundle.parts[i];
      try {
        bundle.hulls[i] = convex_hull(part.vertices);
      } catch (const DegeneratePart&) {
        bundle.hulls[i] = bounding_tetrahedron(part.vertices);
        bundle.hull_fallback[i] = true;
      }
      bundle.hulls[i].part_id = part.part_id;
    }
  });
}

void write_bundle(const std::filesystem::path& dir, const MeshBundle& bundle, const Normalization& normalization) {
  namespace fs = std::filesystem;
  if (fs::exists(dir) && !fs::is_empty(dir) && !fs::exists(dir / "manifest.json")) {
    throw IoError(dir.string() + " exists and is not a mesh bundle");
  }
  fs::path tmp = dir;
  tmp += ".partial";
  fs::remove_all(tmp);
  fs::create_directories(tmp);

  char name[32];
  nlohmann::json parts = nlohmann::json::array();
  nlohmann::json hulls = nlohmann::json::array();
  write_obj(tmp / "global.obj", denormalized(bundle.global, normalization));
  for (std::size_t i = 0; i < bundle.parts.size(); ++i) {
    std::snprintf(name, sizeof name, "part_%03zu.obj", i);
    write_obj(tmp / name, denormalized(bundle.parts[i], normalization));
    parts.push_back({{"file", name},
                     {"center", bundle.parts[i].part_id.value_or(i)},
                     {"triangles", bundle.parts[i].triangles.size()},
                     {"empty", bundle.parts[i].empty()}});
  }
  for (std::size_t i = 0; i < bundle.hulls.size(); ++i) {
    std::snprintf(name, sizeof name, "hull_%03zu.obj", i);
    write_obj(tmp / name, denormalized(bundle.hulls[i], normalization));
    hulls.push_back({{"file", name},
                     {"center", bundle.hulls[i].part_id.value_or(i)},
                     {"fallback", static_cast<bool>(bundle.hull_fallback[i])}});
  }
  nlohmann::json manifest = {{"checkpoint", bundle.checkpoint_id}, {"R", bundle.resolution},
                             {"I_prime", bundle.level},           {"mode", bundle.affinity_mode},
                             {"outside_fill", to_string(bundle.fill)}, {"parts", parts},
                             {"hulls", hulls}};
  {
    std::ofstream out(tmp / "manifest.json");
    if (!out) throw IoError("cannot write manifest in " + tmp.string());
    out << manifest.dump(2) << '\n';
  }
  fs::remove_all(dir);
  fs::rename(tmp, dir);
}

}  // namespace lpi
