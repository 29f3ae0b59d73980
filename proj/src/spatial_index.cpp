#include "lpi/spatial_index.hpp"

#include "lpi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace lpi {
namespace {

constexpr std::uint32_t kLeafSize = 8;

// Lexicographic (squared distance, index) order used for every comparison.
struct Candidate {
  double d2;
  std::size_t index;
  bool operator<(const Candidate& o) const { return d2 < o.d2 || (d2 == o.d2 && index < o.index); }
};

}  // namespace

SpatialIndex::SpatialIndex(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
  if (points_.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw InvalidArgument("spatial index supports fewer than 2^32 points");
  }
  order_.resize(points_.size());
  for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    build(0, static_cast<std::uint32_t>(points_.size()));
  }
}

std::int32_t SpatialIndex::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= kLeafSize) return id;

  Vec3 lo = points_[order_[begin]];
  Vec3 hi = lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) return id;  // all coincident: keep as a leaf

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double pa = points_[a][axis], pb = points_[b][axis];
                     return pa < pb || (pa == pb && a < b);
                   });
  const double split = points_[order_[mid]][axis];
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  Node& node = nodes_[static_cast<std::size_t>(id)];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

Neighbor SpatialIndex::nearest(const Vec3& q) const {
  auto result = knn(q, 1);
  if (result.empty()) throw InvalidArgument("nearest query on an empty index");
  return result.front();
}

std::vector<Neighbor> SpatialIndex::knn(const Vec3& q, std::size_t k, std::size_t skip) const {
  std::vector<Neighbor> out;
  if (k == 0 || nodes_.empty()) return out;

  // Max-heap of the best k candidates seen so far.
  std::priority_queue<Candidate> best;
  auto worst = [&] {
    return best.size() < k ? std::numeric_limits<double>::infinity() : best.top().d2;
  };

  std::vector<std::pair<std::int32_t, double>> stack;  // node, lower bound on d2
  stack.emplace_back(0, 0.0);
  while (!stack.empty()) {
    const auto [id, bound] = stack.back();
    stack.pop_back();
    // Equal bounds may still hide a lower-index tie, so only strictly worse is pruned.
    if (bound > worst()) continue;
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.axis < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::size_t idx = order_[i];
        if (idx == skip) continue;
        const Candidate c{(points_[idx] - q).squaredNorm(), idx};
        if (best.size() < k) {
          best.push(c);
        } else if (c < best.top()) {
          best.pop();
          best.push(c);
        }
      }
      continue;
    }
    const double diff = q[node.axis] - node.split;
    const double far_bound = std::max(bound, diff * diff);
    // Points equal to the split value live on both sides of the median, so the
    // far side is always queued with its plane bound.
    if (diff < 0) {
      stack.emplace_back(node.right, far_bound);
      stack.emplace_back(node.left, bound);
    } else {
      stack.emplace_back(node.left, far_bound);
      stack.emplace_back(node.right, bound);
    }
  }

  out.resize(best.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = Neighbor{best.top().index, std::sqrt(best.top().d2)};
    best.pop();
  }
  return out;
}

}  // namespace lpi
