#include "lpi/metrics.hpp"

#include "lpi/errors.hpp"
#include "lpi/parallel.hpp"
#include "lpi/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace lpi {

SampledSurface sample_mesh(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
  if (mesh.empty()) throw EmptyMesh("cannot sample a mesh without triangles");
  std::vector<double> cumulative(mesh.triangles.size());
  double total = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    total += mesh.triangle_area(t);
    cumulative[t] = total;
  }
  if (!(total > 0.0)) throw DegenerateMesh("mesh has zero surface area");

  SampledSurface out;
  out.points.reserve(n);
  out.normals.reserve(n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (std::size_t s = 0; s < n; ++s) {
    const double pick = uniform(rng) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    if (it == cumulative.end()) --it;
    const std::size_t t = static_cast<std::size_t>(it - cumulative.begin());
    const auto& tri = mesh.triangles[t];
    const double r1 = std::sqrt(uniform(rng));
    const double r2 = uniform(rng);
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3& b = mesh.vertices[tri[1]];
    const Vec3& c = mesh.vertices[tri[2]];
    out.points.push_back((1.0 - r1) * a + r1 * (1.0 - r2) * b + r1 * r2 * c);
    out.normals.push_back(mesh.triangle_normal(t).normalized());
  }
  return out;
}

namespace {

// Nearest neighbor in `to` for every point of `from`.
std::vector<Neighbor> nearest_all(const SampledSurface& from, const SampledSurface& to) {
  if (from.size() == 0 || to.size() == 0) throw InvalidArgument("metric inputs must be non-empty");
  const SpatialIndex index(to.points);
  std::vector<Neighbor> out(from.size());
  parallel_for(from.size(), 4096, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = index.nearest(from.points[i]);
  });
  return out;
}

double mean_distance(const std::vector<Neighbor>& nn, int order) {
  double sum = 0.0;
  for (const auto& n : nn) sum += order == 2 ? n.distance * n.distance : n.distance;
  return sum / static_cast<double>(nn.size());
}

}  // namespace

double chamfer(const SampledSurface& a, const SampledSurface& b, int order) {
  if (order != 1 && order != 2) throw InvalidArgument("chamfer order must be 1 or 2");
  return mean_distance(nearest_all(a, b), order) + mean_distance(nearest_all(b, a), order);
}

double normal_consistency(const SampledSurface& a, const SampledSurface& b) {
  if (a.normals.size() != a.size() || b.normals.size() != b.size()) {
    throw InvalidArgument("normal consistency needs normals on both surfaces");
  }
  auto side = [](const SampledSurface& from, const SampledSurface& to) {
    const auto nn = nearest_all(from, to);
    double sum = 0.0;
    for (std::size_t i = 0; i < nn.size(); ++i) sum += std::abs(from.normals[i].dot(to.normals[nn[i].index]));
    return sum / static_cast<double>(nn.size());
  };
  return 0.5 * (side(a, b) + side(b, a));
}

double f_score(const SampledSurface& a, const SampledSurface& b, double mu) {
  if (!(mu > 0.0)) throw InvalidArgument("F-score threshold must be positive");
  auto fraction = [mu](const std::vector<Neighbor>& nn) {
    std::size_t hit = 0;
    for (const auto& n : nn) hit += n.distance <= mu ? 1 : 0;
    return static_cast<double>(hit) / static_cast<double>(nn.size());
  };
  const double precision = fraction(nearest_all(a, b));
  const double recall = fraction(nearest_all(b, a));
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

std::vector<char> occupancy(const TriangleMesh& mesh, const Box& bounds, std::size_t r) {
  if (!is_watertight(mesh)) throw NonWatertight("volumetric IoU needs a closed mesh");
  const Vec3 cell = bounds.extent() / static_cast<double>(r);
  // Columns are nudged off the cell centers by an irrational fraction of a cell so
  // rays do not pass exactly through mesh vertices or edges on regular grids.
  const double jx = 1e-4 * std::sqrt(2.0) * cell.x();
  const double jy = 1e-4 * std::sqrt(3.0) * cell.y();
  std::vector<std::vector<double>> hits(r * r);
  for (const auto& tri : mesh.triangles) {
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3& b = mesh.vertices[tri[1]];
    const Vec3& c = mesh.vertices[tri[2]];
    const double det = (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
    if (det == 0.0) continue;  // vertical triangle, parallel to the rays
    const double xmin = std::min({a.x(), b.x(), c.x()});
    const double xmax = std::max({a.x(), b.x(), c.x()});
    const double ymin = std::min({a.y(), b.y(), c.y()});
    const double ymax = std::max({a.y(), b.y(), c.y()});
    auto first = [](double lo, double origin, double h, double jitter) {
      return static_cast<long>(std::ceil((lo - origin - jitter) / h - 0.5));
    };
    auto last = [](double hi, double origin, double h, double jitter) {
      return static_cast<long>(std::floor((hi - origin - jitter) / h - 0.5));
    };
    const long i0 = std::max(0L, first(xmin, bounds.lo.x(), cell.x(), jx));
    const long i1 = std::min(static_cast<long>(r) - 1, last(xmax, bounds.lo.x(), cell.x(), jx));
    const long j0 = std::max(0L, first(ymin, bounds.lo.y(), cell.y(), jy));
    const long j1 = std::min(static_cast<long>(r) - 1, last(ymax, bounds.lo.y(), cell.y(), jy));
    for (long j = j0; j <= j1; ++j) {
      const double y = bounds.lo.y() + (static_cast<double>(j) + 0.5) * cell.y() + jy;
      for (long i = i0; i <= i1; ++i) {
        const double x = bounds.lo.x() + (static_cast<double>(i) + 0.5) * cell.x() + jx;
        const double u = ((x - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (y - a.y())) / det;
        const double v = ((b.x() - a.x()) * (y - a.y()) - (x - a.x()) * (b.y() - a.y())) / det;
        if (u < 0.0 || v < 0.0 || u + v > 1.0) continue;
        hits[static_cast<std::size_t>(j) * r + static_cast<std::size_t>(i)].push_back(a.z() + u * (b.z() - a.z()) +
                                                                                      v * (c.z() - a.z()));
      }
    }
  }
  std::vector<char> occupied(r * r * r, 0);
  for (std::size_t col = 0; col < r * r; ++col) {
    auto& zs = hits[col];
    std::sort(zs.begin(), zs.end());
    std::size_t crossed = 0;
    for (std::size_t k = 0; k < r; ++k) {
      const double z = bounds.lo.z() + (static_cast<double>(k) + 0.5) * cell.z();
      while (crossed < zs.size() && zs[crossed] < z) ++crossed;
      occupied[k * r * r + col] = static_cast<char>(crossed % 2);
    }
  }
  return occupied;
}

double volumetric_iou(const TriangleMesh& a, const TriangleMesh& b, std::size_t resolution) {
  if (resolution < 1) throw InvalidArgument("IoU resolution must be positive");
  const Box ba = bounding_box(a.vertices);
  const Box bb = bounding_box(b.vertices);
  Box box{ba.lo.cwiseMin(bb.lo), ba.hi.cwiseMax(bb.hi)};
  const Vec3 center = 0.5 * (box.lo + box.hi);
  const double half = 0.5 * box.extent().maxCoeff() * 1.02;
  box = {center - Vec3::Constant(half), center + Vec3::Constant(half)};
  const auto oa = occupancy(a, box, resolution);
  const auto ob = occupancy(b, box, resolution);
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < oa.size(); ++i) {
    inter += (oa[i] && ob[i]) ? 1 : 0;
    uni += (oa[i] || ob[i]) ? 1 : 0;
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace lpi
