#pragma once

#include <cstdint>
#include <string>

#include "coral/point_cloud.hpp"

namespace coral {

struct ScanPair {
  PointCloud cloud_a;  // ground-truth aligned, world frame
  PointCloud cloud_b;
  std::string sequence_id;
  std::size_t pair_index = 0;
};

/// Desk-scale synthetic environments.
///   Corridor:  floor, two side walls and two end walls (no ceiling),
///              sensor inside; structured.
///   PlanePair: one horizontal square patch seen from above; the minimal
///              planar scene.
///   Foliage:   uniform volumetric clutter; unstructured.
enum class SceneKind { Corridor, PlanePair, Foliage };

SceneKind parse_scene_kind(const std::string& name);
std::string scene_kind_name(SceneKind kind);

struct SceneSpec {
  SceneKind kind = SceneKind::Corridor;
  double density = 2000.0;    // target points per square meter of surface
  double extent = 4.0;        // m, principal dimension
  double noise_sigma = 0.005; // m, Gaussian range noise along the sensor ray
  std::uint64_t seed = 0;
};

/// Two independently sampled scans of the same parametric scene, ground
/// truth aligned, labels A/B, with the shared sensor origin set.
/// Deterministic in the seed. Throws Error(InvalidParameter) when density
/// or extent is not positive or noise_sigma is negative.
ScanPair synth_scene(const SceneSpec& spec);

}  // namespace coral
