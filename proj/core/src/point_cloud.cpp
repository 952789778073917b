#include "coral/point_cloud.hpp"

#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "coral/error.hpp"

namespace coral {

PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& t) {
  if (cloud.empty()) {
    fail(ErrorCode::InvalidInput, "apply_transform: empty cloud");
  }
  t.require_valid();

  PointCloud out;
  out.points.reserve(cloud.size());
  for (const Point3& p : cloud.points) {
    out.points.push_back(t.apply(p));
  }
  out.sensor_origin = t.apply(cloud.sensor_origin);
  out.labels = cloud.labels;
  return out;
}

namespace {

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::uint64_t v : {static_cast<std::uint64_t>(k.x),
                            static_cast<std::uint64_t>(k.y),
                            static_cast<std::uint64_t>(k.z)}) {
      h ^= v;
      h *= 0x100000001b3ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

CellKey cell_of(const Point3& p, double cell) {
  return {static_cast<std::int64_t>(std::floor(p.x() / cell)),
          static_cast<std::int64_t>(std::floor(p.y() / cell)),
          static_cast<std::int64_t>(std::floor(p.z() / cell))};
}

}  // namespace

PointCloud voxel_downsample(const PointCloud& cloud, double cell) {
  if (!(cell > 0.0)) {
    fail(ErrorCode::InvalidParameter, "voxel_downsample: cell must be > 0");
  }

  struct Accum {
    Point3 sum = Point3::Zero();
    std::size_t count = 0;
    std::size_t slot = 0;  // output position, first-seen order
  };
  std::unordered_map<CellKey, Accum, CellKeyHash> cells;
  cells.reserve(cloud.size());

  std::size_t next_slot = 0;
  for (const Point3& p : cloud.points) {
    Accum& acc = cells[cell_of(p, cell)];
    if (acc.count == 0) acc.slot = next_slot++;
    acc.sum += p;
    acc.count += 1;
  }

  PointCloud out;
  out.points.assign(next_slot, Point3::Zero());
  out.sensor_origin = cloud.sensor_origin;
  SourceLabel label = cloud.labels.empty() ? SourceLabel::A : cloud.labels.front();
  out.labels.assign(next_slot, label);
  for (const auto& [key, acc] : cells) {
    out.points[acc.slot] = acc.sum / static_cast<double>(acc.count);
  }
  return out;
}

PointCloud join(const PointCloud& a, const PointCloud& b) {
  PointCloud out;
  out.points.reserve(a.size() + b.size());
  out.points.insert(out.points.end(), a.points.begin(), a.points.end());
  out.points.insert(out.points.end(), b.points.begin(), b.points.end());
  out.labels.assign(a.size(), SourceLabel::A);
  out.labels.resize(a.size() + b.size(), SourceLabel::B);
  out.sensor_origin = a.sensor_origin;
  return out;
}

}  // namespace coral
