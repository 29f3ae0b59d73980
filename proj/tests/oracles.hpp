#pragma once

// Straightforward reference implementations the library is checked against.

#include "lpi/geom.hpp"
#include "lpi/geodesic.hpp"
#include "lpi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using lpi::Vec3;

inline std::vector<Vec3> random_points(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<Vec3> out(n);
  for (auto& p : out) p = Vec3(u(rng), u(rng), u(rng));
  return out;
}

/// Greedy FPS from a given start index, O(I * N).
inline std::vector<std::size_t> fps(const std::vector<Vec3>& p, std::size_t count, std::size_t start) {
  std::vector<std::size_t> chosen{start};
  while (chosen.size() < count) {
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      double d = std::numeric_limits<double>::infinity();
      for (auto c : chosen) d = std::min(d, (p[i] - p[c]).norm());
      if (d > best_d) {
        best_d = d;
        best = i;
      }
    }
    chosen.push_back(best);
  }
  return chosen;
}

/// Linear scan nearest neighbor, lowest index on ties.
inline std::pair<std::size_t, double> nearest(const std::vector<Vec3>& p, const Vec3& q) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = (p[i] - q).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return {best, std::sqrt(best_d)};
}

/// All-pairs shortest paths on the same graph.
inline std::vector<std::vector<double>> floyd_warshall(const lpi::KnnGraph& g) {
  const std::size_t n = g.size();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, std::numeric_limits<double>::infinity()));
  for (std::size_t i = 0; i < n; ++i) {
    d[i][i] = 0.0;
    for (const auto& e : g.adjacency[i]) d[i][e.to] = std::min(d[i][e.to], e.weight);
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

inline double chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b, int order) {
  auto side = [order](const std::vector<Vec3>& x, const std::vector<Vec3>& y) {
    double sum = 0.0;
    for (const auto& p : x) {
      const double d = nearest(y, p).second;
      sum += order == 2 ? d * d : d;
    }
    return sum / static_cast<double>(x.size());
  };
  return side(a, b) + side(b, a);
}

inline double f_score(const std::vector<Vec3>& a, const std::vector<Vec3>& b, double mu) {
  auto frac = [mu](const std::vector<Vec3>& x, const std::vector<Vec3>& y) {
    double hit = 0;
    for (const auto& p : x) hit += nearest(y, p).second <= mu ? 1 : 0;
    return hit / static_cast<double>(x.size());
  };
  const double p = frac(a, b);
  const double r = frac(b, a);
  return p + r == 0.0 ? 0.0 : 2 * p * r / (p + r);
}

inline double normal_consistency(const lpi::SampledSurface& a, const lpi::SampledSurface& b) {
  auto side = [](const lpi::SampledSurface& x, const lpi::SampledSurface& y) {
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sum += std::abs(x.normals[i].dot(y.normals[nearest(y.points, x.points[i]).first]));
    }
    return sum / static_cast<double>(x.size());
  };
  return 0.5 * (side(a, b) + side(b, a));
}

/// Vertex set of the convex hull by exhaustive facet enumeration, O(n^4):
/// a triple spans a facet when every other point lies on one side of its plane.
inline std::vector<std::size_t> hull_vertices(const std::vector<Vec3>& p) {
  const std::size_t n = p.size();
  std::vector<char> on(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) {
        const Vec3 nrm = (p[j] - p[i]).cross(p[k] - p[i]);
        if (nrm.norm() < 1e-14) continue;
        int pos = 0, neg = 0;
        for (std::size_t m = 0; m < n && !(pos && neg); ++m) {
          const double s = nrm.dot(p[m] - p[i]);
          if (s > 1e-12) ++pos;
          if (s < -1e-12) ++neg;
        }
        if (!(pos && neg)) on[i] = on[j] = on[k] = 1;
      }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i)
    if (on[i]) out.push_back(i);
  return out;
}

}  // namespace oracle
