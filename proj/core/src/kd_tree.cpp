#include "coral/kd_tree.hpp"

#include <algorithm>
#include <array>

namespace coral {

namespace {

struct Entry {
  Point3 p;
  std::uint32_t original;
};

}  // namespace

KdTree::KdTree(std::span<const Point3> points) {
  const std::size_t n = points.size();
  if (n == 0) return;

  std::vector<Entry> entries(n);
  for (std::size_t i = 0; i < n; ++i) {
    entries[i] = {points[i], static_cast<std::uint32_t>(i)};
  }

  nodes_.reserve(2 * n / kLeafCapacity + 2);

  // Iterative construction; each frame subdivides entries[begin, end).
  struct BuildFrame {
    std::uint32_t begin, end;
    std::uint32_t parent;  // node waiting for its right-child index
    bool is_right;
  };
  std::vector<BuildFrame> work;
  work.push_back({0, static_cast<std::uint32_t>(n), 0, false});

  while (!work.empty()) {
    BuildFrame frame = work.back();
    work.pop_back();

    std::uint32_t node_index = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();
    if (frame.is_right) nodes_[frame.parent].right = node_index;

    std::uint32_t count = frame.end - frame.begin;
    if (count <= kLeafCapacity) {
      Node& node = nodes_[node_index];
      node.axis = kLeafAxis;
      node.begin = frame.begin;
      node.end = frame.end;
      continue;
    }

    // Split the widest dimension at its median.
    Point3 lo = entries[frame.begin].p;
    Point3 hi = lo;
    for (std::uint32_t i = frame.begin + 1; i < frame.end; ++i) {
      lo = lo.cwiseMin(entries[i].p);
      hi = hi.cwiseMax(entries[i].p);
    }
    Point3 extent = hi - lo;
    std::uint32_t axis = 0;
    if (extent.y() > extent[axis]) axis = 1;
    if (extent.z() > extent[axis]) axis = 2;

    std::uint32_t mid = frame.begin + count / 2;
    std::nth_element(entries.begin() + frame.begin, entries.begin() + mid,
                     entries.begin() + frame.end,
                     [axis](const Entry& l, const Entry& r) {
                       return l.p[axis] < r.p[axis];
                     });

    nodes_[node_index].axis = axis;
    nodes_[node_index].split = entries[mid].p[axis];

    // Right child is built after the whole left subtree, so push it first.
    work.push_back({mid, frame.end, node_index, true});
    work.push_back({frame.begin, mid, node_index, false});
  }

  points_.resize(n);
  original_index_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    points_[i] = entries[i].p;
    original_index_[i] = entries[i].original;
  }
}

void KdTree::radius_search(const Point3& query, double radius,
                           std::vector<std::uint32_t>& out) const {
  out.clear();
  if (points_.empty() || !(radius > 0.0)) return;
  const double r2 = radius * radius;

  std::array<std::uint32_t, 128> stack;
  std::size_t top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const std::uint32_t index = stack[--top];
    const Node& node = nodes_[index];
    if (node.axis == kLeafAxis) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        if ((points_[i] - query).squaredNorm() <= r2) {
          out.push_back(original_index_[i]);
        }
      }
      continue;
    }
    // Left child holds coordinates <= split, right child >= split, so the
    // far side can be skipped exactly when the axis distance exceeds r.
    double diff = query[node.axis] - node.split;
    if (diff <= 0.0) {
      if (diff * diff <= r2) stack[top++] = node.right;
      stack[top++] = index + 1;
    } else {
      if (diff * diff <= r2) stack[top++] = index + 1;
      stack[top++] = node.right;
    }
  }
}

std::vector<std::uint32_t> KdTree::radius_search(const Point3& query,
                                                 double radius) const {
  std::vector<std::uint32_t> out;
  radius_search(query, radius, out);
  return out;
}

bool KdTree::has_neighbor_within(const Point3& query, double radius) const {
  if (points_.empty() || !(radius > 0.0)) return false;
  const double r2 = radius * radius;

  std::array<std::uint32_t, 128> stack;
  std::size_t top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const std::uint32_t index = stack[--top];
    const Node& node = nodes_[index];
    if (node.axis == kLeafAxis) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        if ((points_[i] - query).squaredNorm() <= r2) return true;
      }
      continue;
    }
    double diff = query[node.axis] - node.split;
    if (diff <= 0.0) {
      if (diff * diff <= r2) stack[top++] = node.right;
      stack[top++] = index + 1;
    } else {
      if (diff * diff <= r2) stack[top++] = index + 1;
      stack[top++] = node.right;
    }
  }
  return false;
}

}  // namespace coral
