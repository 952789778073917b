#pragma once

// Independent reference implementations used to cross-check the library.
// Everything here is deliberately written with plain loops and closed-form
// arithmetic, no spatial index, no eigensolver, so that a defect in the
// production path cannot hide in a shared helper.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <tuple>
#include <vector>

#include "coral/entropy.hpp"
#include "coral/point_cloud.hpp"

namespace oracles {

inline constexpr double kTwoPiE = 2.0 * std::numbers::pi * std::numbers::e;

// ---------------------------------------------------------------------------
// neighbors

inline std::vector<std::uint32_t> brute_radius_search(
    const std::vector<coral::Point3>& points, const coral::Point3& query,
    double radius) {
  std::vector<std::uint32_t> out;
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < points.size(); ++i) {
    double dx = points[i].x() - query.x();
    double dy = points[i].y() - query.y();
    double dz = points[i].z() - query.z();
    if (dx * dx + dy * dy + dz * dz <= r2) {
      out.push_back(static_cast<std::uint32_t>(i));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// voxel statistics

struct VoxelStats {
  double sum[3] = {0, 0, 0};
  std::size_t count = 0;
};

inline std::map<std::tuple<long, long, long>, VoxelStats> brute_voxel_buckets(
    const std::vector<coral::Point3>& points, double cell) {
  std::map<std::tuple<long, long, long>, VoxelStats> buckets;
  for (const coral::Point3& p : points) {
    auto key = std::make_tuple(static_cast<long>(std::floor(p.x() / cell)),
                               static_cast<long>(std::floor(p.y() / cell)),
                               static_cast<long>(std::floor(p.z() / cell)));
    VoxelStats& stats = buckets[key];
    stats.sum[0] += p.x();
    stats.sum[1] += p.y();
    stats.sum[2] += p.z();
    stats.count += 1;
  }
  return buckets;
}

// ---------------------------------------------------------------------------
// covariance, determinant, entropy (closed form, no eigensolver)

struct Cov3 {
  double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
};

/// Two-pass unbiased sample covariance over the given points.
inline Cov3 two_pass_covariance(const std::vector<coral::Point3>& points) {
  const std::size_t n = points.size();
  double mean[3] = {0, 0, 0};
  for (const coral::Point3& p : points) {
    mean[0] += p.x();
    mean[1] += p.y();
    mean[2] += p.z();
  }
  for (double& m : mean) m /= static_cast<double>(n);

  Cov3 cov;
  for (const coral::Point3& p : points) {
    double d[3] = {p.x() - mean[0], p.y() - mean[1], p.z() - mean[2]};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        cov.m[r][c] += d[r] * d[c];
      }
    }
  }
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      cov.m[r][c] /= static_cast<double>(n - 1);
    }
  }
  return cov;
}

inline double det3(const Cov3& c) {
  return c.m[0][0] * (c.m[1][1] * c.m[2][2] - c.m[1][2] * c.m[2][1]) -
         c.m[0][1] * (c.m[1][0] * c.m[2][2] - c.m[1][2] * c.m[2][0]) +
         c.m[0][2] * (c.m[1][0] * c.m[2][1] - c.m[1][1] * c.m[2][0]);
}

inline double entropy_of(double det, double epsilon) {
  double arg = kTwoPiE * det + epsilon;
  if (arg <= 0.0) return -std::numeric_limits<double>::infinity();
  return 0.5 * std::log(arg);
}

// ---------------------------------------------------------------------------
// the full dual-entropy pipeline, brute force

struct BruteQuality {
  bool measured = false;
  double overlap_ratio = 0.0;
  double h_sep = 0.0;
  double h_joint = 0.0;
  double q = 0.0;
  std::size_t retained_count = 0;
};

inline double brute_dynamic_radius(const coral::Point3& p,
                                   const coral::Point3& origin,
                                   const coral::EntropyParams& params) {
  double dx = p.x() - origin.x();
  double dy = p.y() - origin.y();
  double dz = p.z() - origin.z();
  double d = std::sqrt(dx * dx + dy * dy + dz * dz);
  double r = d * std::sin(params.alpha);
  return std::min(std::max(r, params.r_min), params.r_max);
}

/// Direct reimplementation of the quality pipeline with exhaustive
/// neighbor scans and closed-form determinants.
inline BruteQuality brute_coral_quality(const coral::PointCloud& a,
                                        const coral::PointCloud& b,
                                        const coral::EntropyParams& params) {
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  std::vector<coral::Point3> joint = a.points;
  joint.insert(joint.end(), b.points.begin(), b.points.end());

  std::vector<double> radius(na + nb);
  std::vector<bool> overlapping(na + nb, false);
  for (std::size_t i = 0; i < na + nb; ++i) {
    const bool from_a = i < na;
    const coral::Point3& p = joint[i];
    radius[i] = brute_dynamic_radius(
        p, from_a ? a.sensor_origin : b.sensor_origin, params);
    const auto& other = from_a ? b.points : a.points;
    const double r2 = radius[i] * radius[i];
    for (const coral::Point3& o : other) {
      double dx = o.x() - p.x(), dy = o.y() - p.y(), dz = o.z() - p.z();
      if (dx * dx + dy * dy + dz * dz <= r2) {
        overlapping[i] = true;
        break;
      }
    }
  }

  BruteQuality result;
  std::size_t overlap_count = 0;
  for (bool f : overlapping) overlap_count += f ? 1 : 0;
  result.overlap_ratio =
      static_cast<double>(overlap_count) / static_cast<double>(na + nb);
  if (result.overlap_ratio < params.min_overlap) return result;
  result.measured = true;

  struct Entry {
    std::size_t index;
    double h_sep, h_joint;
  };
  std::vector<Entry> valid;
  for (std::size_t i = 0; i < na + nb; ++i) {
    if (!overlapping[i]) continue;
    const bool from_a = i < na;
    const coral::Point3& p = joint[i];
    const auto& own = from_a ? a.points : b.points;
    const double r2 = radius[i] * radius[i];

    std::vector<coral::Point3> sep_neighbors;
    for (const coral::Point3& o : own) {
      double dx = o.x() - p.x(), dy = o.y() - p.y(), dz = o.z() - p.z();
      if (dx * dx + dy * dy + dz * dz <= r2) sep_neighbors.push_back(o);
    }
    if (sep_neighbors.size() < params.min_neighbors) continue;

    std::vector<coral::Point3> joint_neighbors;
    for (const coral::Point3& o : joint) {
      double dx = o.x() - p.x(), dy = o.y() - p.y(), dz = o.z() - p.z();
      if (dx * dx + dy * dy + dz * dz <= r2) joint_neighbors.push_back(o);
    }

    double h_sep =
        entropy_of(det3(two_pass_covariance(sep_neighbors)), params.epsilon);
    double h_joint =
        entropy_of(det3(two_pass_covariance(joint_neighbors)), params.epsilon);
    if (std::isfinite(h_sep) && std::isfinite(h_joint)) {
      valid.push_back({i, h_sep, h_joint});
    }
  }
  if (valid.empty()) {
    result.measured = false;
    return result;
  }

  std::vector<Entry> order = valid;
  std::sort(order.begin(), order.end(), [](const Entry& l, const Entry& r) {
    return std::tie(l.h_sep, l.index) < std::tie(r.h_sep, r.index);
  });
  std::size_t reject =
      static_cast<std::size_t>(std::floor(params.e_reject * valid.size()));
  std::vector<Entry> retained(order.begin() + reject, order.end());
  std::sort(retained.begin(), retained.end(),
            [](const Entry& l, const Entry& r) { return l.index < r.index; });
  result.retained_count = retained.size();

  auto lower_median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[(v.size() - 1) / 2];
  };
  if (params.aggregation == coral::Aggregation::Mean) {
    double sum_sep = 0.0, sum_joint = 0.0;
    for (const Entry& e : retained) {
      sum_sep += e.h_sep;
      sum_joint += e.h_joint;
    }
    result.h_sep = sum_sep / static_cast<double>(retained.size());
    result.h_joint = sum_joint / static_cast<double>(retained.size());
  } else {
    std::vector<double> sep, joint_vals;
    for (const Entry& e : retained) {
      sep.push_back(e.h_sep);
      joint_vals.push_back(e.h_joint);
    }
    result.h_sep = lower_median(sep);
    result.h_joint = lower_median(joint_vals);
  }
  result.q = result.h_joint - result.h_sep;
  return result;
}

// ---------------------------------------------------------------------------
// random cloud helpers

inline std::vector<coral::Point3> random_box_points(std::size_t n,
                                                    double extent,
                                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, extent);
  std::vector<coral::Point3> points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    points.emplace_back(u(rng), u(rng), u(rng));
  }
  return points;
}

inline coral::PointCloud random_box_cloud(std::size_t n, double extent,
                                          std::uint64_t seed) {
  return coral::PointCloud(random_box_points(n, extent, seed),
                           coral::Point3(extent / 2, extent / 2, extent));
}

/// Noisy plane patch in z = 0, x and y in [0, extent].
inline coral::PointCloud plane_cloud(std::size_t n, double extent,
                                     double sigma, std::uint64_t seed,
                                     coral::SourceLabel label =
                                         coral::SourceLabel::A) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, extent);
  std::normal_distribution<double> noise(0.0, sigma);
  std::vector<coral::Point3> points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double z = sigma > 0.0 ? noise(rng) : 0.0;
    points.emplace_back(u(rng), u(rng), z);
  }
  return coral::PointCloud(std::move(points),
                           coral::Point3(extent / 2, extent / 2, extent),
                           label);
}

}  // namespace oracles
