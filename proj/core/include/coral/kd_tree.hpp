#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "coral/types.hpp"

namespace coral {

/// Immutable kd-tree over a fixed point set answering exact fixed-radius
/// queries: every indexed point with distance <= r is reported, boundary
/// inclusive, identical (as a set) to an exhaustive scan. Built once,
/// never updated; safe to query from many threads concurrently.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::span<const Point3> points);

  std::size_t size() const { return points_.size(); }

  /// Appends the original-order indices of all points within `radius` of
  /// `query` to `out` (out is cleared first).
  void radius_search(const Point3& query, double radius,
                     std::vector<std::uint32_t>& out) const;

  std::vector<std::uint32_t> radius_search(const Point3& query,
                                           double radius) const;

  /// True if any indexed point lies within `radius` of `query`.
  bool has_neighbor_within(const Point3& query, double radius) const;

 private:
  static constexpr std::uint32_t kLeafAxis = 3;
  static constexpr std::uint32_t kLeafCapacity = 16;

  struct Node {
    double split = 0.0;      // internal: splitting coordinate
    std::uint32_t axis = kLeafAxis;  // 0..2 internal, kLeafAxis for leaves
    std::uint32_t right = 0;         // internal: right child (left is self+1)
    std::uint32_t begin = 0;         // leaf: payload range in points_
    std::uint32_t end = 0;
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end);

  // Points are stored permuted so every leaf range is contiguous.
  std::vector<Point3> points_;
  std::vector<std::uint32_t> original_index_;
  std::vector<Node> nodes_;
};

}  // namespace coral
