#pragma once

#include "lpi/geom.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lpi {

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;
};

/// Balanced k-d tree over a fixed point set. Every query is exact, and ties
/// between equidistant points resolve to the lowest index, so results agree
/// with an exhaustive scan.
class SpatialIndex {
 public:
  SpatialIndex() = default;
  explicit SpatialIndex(std::span<const Vec3> points);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const std::vector<Vec3>& points() const { return points_; }

  Neighbor nearest(const Vec3& q) const;

  /// The k nearest points ordered by (distance, index). With `skip` set, that
  /// point index is left out (used for self-excluding neighborhoods).
  std::vector<Neighbor> knn(const Vec3& q, std::size_t k,
                            std::size_t skip = static_cast<std::size_t>(-1)) const;

 private:
  struct Node {
    std::uint32_t begin = 0;  // range into order_
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = -1;  // -1 marks a leaf
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace lpi
