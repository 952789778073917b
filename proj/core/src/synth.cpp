#include "coral/synth.hpp"

#include <cmath>
#include <random>

#include "coral/error.hpp"
#include "detail/rng.hpp"

namespace coral {

SceneKind parse_scene_kind(const std::string& name) {
  if (name == "corridor") return SceneKind::Corridor;
  if (name == "plane-pair") return SceneKind::PlanePair;
  if (name == "foliage") return SceneKind::Foliage;
  fail(ErrorCode::InvalidParameter, "unknown scene kind '" + name + "'");
}

std::string scene_kind_name(SceneKind kind) {
  switch (kind) {
    case SceneKind::Corridor: return "corridor";
    case SceneKind::PlanePair: return "plane-pair";
    case SceneKind::Foliage: return "foliage";
  }
  return "corridor";
}

namespace {

struct Rectangle {
  Point3 origin;
  Point3 edge_u;
  Point3 edge_v;
  double area() const { return edge_u.norm() * edge_v.norm(); }
};

void sample_surfaces(const std::vector<Rectangle>& surfaces, double density,
                     double noise_sigma, const Point3& sensor,
                     std::mt19937_64& rng, std::vector<Point3>& out) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (const Rectangle& rect : surfaces) {
    auto count = static_cast<std::size_t>(std::lround(density * rect.area()));
    for (std::size_t i = 0; i < count; ++i) {
      double s = unit(rng);
      double t = unit(rng);
      Point3 p = rect.origin + s * rect.edge_u + t * rect.edge_v;
      if (noise_sigma > 0.0) {
        Point3 ray = p - sensor;
        double len = ray.norm();
        if (len > 1e-12) {
          p += (noise_sigma * noise(rng) / len) * ray;
        }
      }
      out.push_back(p);
    }
  }
}

void sample_volume(const Point3& lo, const Point3& hi, std::size_t count,
                   double noise_sigma, const Point3& sensor,
                   std::mt19937_64& rng, std::vector<Point3>& out) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = 0; i < count; ++i) {
    Point3 p(lo.x() + unit(rng) * (hi.x() - lo.x()),
             lo.y() + unit(rng) * (hi.y() - lo.y()),
             lo.z() + unit(rng) * (hi.z() - lo.z()));
    if (noise_sigma > 0.0) {
      Point3 ray = p - sensor;
      double len = ray.norm();
      if (len > 1e-12) {
        p += (noise_sigma * noise(rng) / len) * ray;
      }
    }
    out.push_back(p);
  }
}

PointCloud sample_scan(const SceneSpec& spec, const Point3& sensor,
                       std::uint64_t stream, SourceLabel label) {
  std::mt19937_64 rng(stream);
  std::vector<Point3> points;

  switch (spec.kind) {
    case SceneKind::Corridor: {
      const double length = spec.extent;
      const double width = spec.extent / 2.0;
      const double height = spec.extent / 3.0;
      const double half_w = width / 2.0;
      const std::vector<Rectangle> surfaces = {
          // floor
          {{-half_w, 0.0, 0.0}, {width, 0.0, 0.0}, {0.0, length, 0.0}},
          // side walls
          {{-half_w, 0.0, 0.0}, {0.0, length, 0.0}, {0.0, 0.0, height}},
          {{half_w, 0.0, 0.0}, {0.0, length, 0.0}, {0.0, 0.0, height}},
          // end walls
          {{-half_w, 0.0, 0.0}, {width, 0.0, 0.0}, {0.0, 0.0, height}},
          {{-half_w, length, 0.0}, {width, 0.0, 0.0}, {0.0, 0.0, height}},
      };
      sample_surfaces(surfaces, spec.density, spec.noise_sigma, sensor, rng,
                      points);
      break;
    }
    case SceneKind::PlanePair: {
      const std::vector<Rectangle> surfaces = {
          {{0.0, 0.0, 0.0}, {spec.extent, 0.0, 0.0}, {0.0, spec.extent, 0.0}},
      };
      sample_surfaces(surfaces, spec.density, spec.noise_sigma, sensor, rng,
                      points);
      break;
    }
    case SceneKind::Foliage: {
      auto count = static_cast<std::size_t>(
          std::lround(spec.density * spec.extent * spec.extent));
      sample_volume(Point3(0.0, 0.0, 0.0),
                    Point3(spec.extent, spec.extent, spec.extent / 2.0), count,
                    spec.noise_sigma, sensor, rng, points);
      break;
    }
  }

  return PointCloud(std::move(points), sensor, label);
}

}  // namespace

ScanPair synth_scene(const SceneSpec& spec) {
  if (!(spec.density > 0.0) || !(spec.extent > 0.0)) {
    fail(ErrorCode::InvalidParameter,
         "synth_scene: density and extent must be > 0");
  }
  if (!(spec.noise_sigma >= 0.0)) {
    fail(ErrorCode::InvalidParameter, "synth_scene: noise_sigma must be >= 0");
  }

  Point3 sensor;
  switch (spec.kind) {
    case SceneKind::Corridor:
      sensor = Point3(0.0, spec.extent / 2.0, spec.extent / 6.0);
      break;
    case SceneKind::PlanePair:
      sensor = Point3(spec.extent / 2.0, spec.extent / 2.0, spec.extent);
      break;
    case SceneKind::Foliage:
      sensor = Point3(spec.extent / 2.0, spec.extent / 2.0, spec.extent);
      break;
  }

  ScanPair pair;
  pair.sequence_id = scene_kind_name(spec.kind);
  pair.pair_index = 0;
  pair.cloud_a = sample_scan(spec, sensor,
                             detail::derive_stream(spec.seed, "scan", 0),
                             SourceLabel::A);
  pair.cloud_b = sample_scan(spec, sensor,
                             detail::derive_stream(spec.seed, "scan", 1),
                             SourceLabel::B);
  return pair;
}

}  // namespace coral
