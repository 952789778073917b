#pragma once

#include <cstdint>
#include <vector>

#include "coral/types.hpp"

namespace coral {

/// Which of the two clouds of a pair a point came from. Joined clouds keep
/// this per point so the two sides stay distinguishable.
enum class SourceLabel : std::uint8_t { A = 0, B = 1 };

struct PointCloud {
  std::vector<Point3> points;
  Point3 sensor_origin = Point3::Zero();
  std::vector<SourceLabel> labels;  // always same length as points

  PointCloud() = default;
  PointCloud(std::vector<Point3> pts, const Point3& origin,
             SourceLabel label = SourceLabel::A)
      : points(std::move(pts)),
        sensor_origin(origin),
        labels(points.size(), label) {}

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// Maps every point and the sensor origin by p -> R p + t.
/// Throws Error(InvalidTransform) for a non-orthonormal rotation and
/// Error(InvalidInput) for an empty cloud.
PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& t);

/// Centroid-per-occupied-cell downsampling on a grid anchored at the world
/// origin; cell membership is floor(coord / cell). Output cells appear in
/// first-seen input order, which makes the operation deterministic and
/// idempotent. Throws Error(InvalidParameter) when cell <= 0.
PointCloud voxel_downsample(const PointCloud& cloud, double cell);

/// Concatenation with provenance: a's points come first labeled A, then b's
/// labeled B. Duplicates are kept. The sensor origin of `a` is carried over;
/// joined clouds are only ever used for neighbor queries.
PointCloud join(const PointCloud& a, const PointCloud& b);

}  // namespace coral
