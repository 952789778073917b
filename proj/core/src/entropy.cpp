#include "coral/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "coral/error.hpp"
#include "coral/kd_tree.hpp"
#include "coral/parallel.hpp"
#include "detail/covariance.hpp"

namespace coral {

using detail::covariance_impl;
using detail::covariance_of;

namespace {

constexpr double kTwoPiE = 2.0 * std::numbers::pi * std::numbers::e;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Per-point radii and cross-cloud overlap flags for both clouds.
struct OverlapInfo {
  std::vector<double> radius_a, radius_b;
  std::vector<char> overlap_a, overlap_b;
  double ratio = 0.0;
};

OverlapInfo compute_overlap(const PointCloud& a, const PointCloud& b,
                            const KdTree& index_a, const KdTree& index_b,
                            const EntropyParams& params) {
  OverlapInfo info;
  info.radius_a.resize(a.size());
  info.radius_b.resize(b.size());
  info.overlap_a.assign(a.size(), 0);
  info.overlap_b.assign(b.size(), 0);

  parallel_for_blocks(a.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double r = dynamic_radius(a.points[i], a.sensor_origin, params);
      info.radius_a[i] = r;
      info.overlap_a[i] = index_b.has_neighbor_within(a.points[i], r) ? 1 : 0;
    }
  });
  parallel_for_blocks(b.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double r = dynamic_radius(b.points[i], b.sensor_origin, params);
      info.radius_b[i] = r;
      info.overlap_b[i] = index_a.has_neighbor_within(b.points[i], r) ? 1 : 0;
    }
  });

  std::size_t overlapping = 0;
  for (char f : info.overlap_a) overlapping += f;
  for (char f : info.overlap_b) overlapping += f;
  info.ratio = static_cast<double>(overlapping) /
               static_cast<double>(a.size() + b.size());
  return info;
}

/// Lower median of an unsorted copy; deterministic for even counts.
double lower_median(std::vector<double> values) {
  std::size_t mid = (values.size() - 1) / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  return values[mid];
}

}  // namespace

void EntropyParams::validate() const {
  if (!(r_min > 0.0) || !(r_max >= r_min)) {
    fail(ErrorCode::InvalidParameter, "entropy: need 0 < r_min <= r_max");
  }
  if (!(alpha >= 0.0) || !(alpha < std::numbers::pi / 2.0)) {
    fail(ErrorCode::InvalidParameter, "entropy: need 0 <= alpha < pi/2");
  }
  if (!(epsilon >= 0.0)) {
    fail(ErrorCode::InvalidParameter, "entropy: need epsilon >= 0");
  }
  if (!(e_reject >= 0.0) || !(e_reject < 1.0)) {
    fail(ErrorCode::InvalidParameter, "entropy: need 0 <= e_reject < 1");
  }
  if (!(min_overlap >= 0.0) || !(min_overlap <= 1.0)) {
    fail(ErrorCode::InvalidParameter, "entropy: need 0 <= min_overlap <= 1");
  }
  if (min_neighbors < 4) {
    fail(ErrorCode::InvalidParameter, "entropy: need min_neighbors >= 4");
  }
}

CovarianceSummary sample_covariance(std::span<const Point3> neighbors) {
  if (neighbors.size() < 2) {
    fail(ErrorCode::DegenerateNeighborhood,
         "sample_covariance: need at least 2 points");
  }
  return covariance_impl(neighbors.size(),
                         [&](std::size_t i) -> const Point3& {
                           return neighbors[i];
                         });
}

double point_entropy(double det, double epsilon) {
  if (det < 0.0) {
    fail(ErrorCode::NumericalDegeneracy,
         "point_entropy: negative determinant");
  }
  double arg = kTwoPiE * det + epsilon;
  if (arg <= 0.0) return kNegInf;
  return 0.5 * std::log(arg);
}

double dynamic_radius(const Point3& p, const Point3& sensor_origin,
                      const EntropyParams& params) {
  double d = (p - sensor_origin).norm();
  return std::clamp(d * std::sin(params.alpha), params.r_min, params.r_max);
}

double overlap_ratio(const PointCloud& a, const PointCloud& b,
                     const EntropyParams& params) {
  params.validate();
  if (a.empty() || b.empty()) {
    fail(ErrorCode::InvalidInput, "overlap_ratio: empty cloud");
  }
  KdTree index_a(a.points);
  KdTree index_b(b.points);
  return compute_overlap(a, b, index_a, index_b, params).ratio;
}

QualityResult coral_quality(const PointCloud& a, const PointCloud& b,
                            const EntropyParams& params) {
  params.validate();
  if (a.empty() || b.empty()) {
    fail(ErrorCode::InvalidInput, "coral_quality: empty cloud");
  }

  KdTree index_a(a.points);
  KdTree index_b(b.points);
  OverlapInfo overlap = compute_overlap(a, b, index_a, index_b, params);

  QualityResult result;
  result.overlap_ratio = overlap.ratio;
  if (overlap.ratio < params.min_overlap) {
    result.status = MeasureStatus::InsufficientOverlap;
    result.h_sep = result.h_joint = result.q = kNaN;
    return result;
  }
  result.status = MeasureStatus::Measured;

  const PointCloud joint = join(a, b);
  const KdTree index_joint(joint.points);
  const std::size_t n = joint.size();
  const std::size_t a_count = a.size();

  result.per_point.resize(n);
  parallel_for_blocks(n, [&](std::size_t begin, std::size_t end) {
    std::vector<std::uint32_t> neighbors;
    for (std::size_t i = begin; i < end; ++i) {
      PerPointEntropy& entry = result.per_point[i];
      entry.point_index = static_cast<std::uint32_t>(i);
      entry.separate_entropy = entry.joint_entropy = entry.q = kNaN;
      entry.valid = false;

      const bool from_a = i < a_count;
      const std::size_t local = from_a ? i : i - a_count;
      entry.radius_used =
          from_a ? overlap.radius_a[local] : overlap.radius_b[local];
      const bool overlapping =
          from_a ? overlap.overlap_a[local] : overlap.overlap_b[local];
      if (!overlapping) continue;  // no effect on the measure

      const Point3& p = joint.points[i];
      const KdTree& own_index = from_a ? index_a : index_b;
      const std::vector<Point3>& own_points = from_a ? a.points : b.points;

      own_index.radius_search(p, entry.radius_used, neighbors);
      if (neighbors.size() < params.min_neighbors) continue;
      double h_sep =
          point_entropy(covariance_of(own_points, neighbors).determinant,
                        params.epsilon);
      entry.separate_entropy = h_sep;

      index_joint.radius_search(p, entry.radius_used, neighbors);
      double h_joint =
          point_entropy(covariance_of(joint.points, neighbors).determinant,
                        params.epsilon);
      entry.joint_entropy = h_joint;

      if (std::isfinite(h_sep) && std::isfinite(h_joint)) {
        entry.valid = true;
        entry.q = h_joint - h_sep;
      }
    }
  });

  std::vector<std::uint32_t> valid;
  valid.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (result.per_point[i].valid) valid.push_back(static_cast<std::uint32_t>(i));
  }

  // Outlier rejection: drop the e_reject fraction with the lowest separate
  // entropy; stable sort keeps ties in point-index order.
  const std::size_t reject_count = static_cast<std::size_t>(
      std::floor(params.e_reject * static_cast<double>(valid.size())));
  std::vector<std::uint32_t> order = valid;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t l, std::uint32_t r) {
                     return result.per_point[l].separate_entropy <
                            result.per_point[r].separate_entropy;
                   });
  std::vector<char> rejected(n, 0);
  for (std::size_t i = 0; i < reject_count; ++i) rejected[order[i]] = 1;

  result.retained.reserve(valid.size() - reject_count);
  for (std::uint32_t i : valid) {
    if (!rejected[i]) result.retained.push_back(i);
  }
  if (result.retained.empty()) {
    fail(ErrorCode::InsufficientData,
         "coral_quality: no valid points after filtering");
  }

  if (params.aggregation == Aggregation::Mean) {
    double sum_sep = 0.0, sum_joint = 0.0;
    for (std::uint32_t i : result.retained) {
      sum_sep += result.per_point[i].separate_entropy;
      sum_joint += result.per_point[i].joint_entropy;
    }
    const double count = static_cast<double>(result.retained.size());
    result.h_sep = sum_sep / count;
    result.h_joint = sum_joint / count;
  } else {
    std::vector<double> sep, joint_vals;
    sep.reserve(result.retained.size());
    joint_vals.reserve(result.retained.size());
    for (std::uint32_t i : result.retained) {
      sep.push_back(result.per_point[i].separate_entropy);
      joint_vals.push_back(result.per_point[i].joint_entropy);
    }
    result.h_sep = lower_median(std::move(sep));
    result.h_joint = lower_median(std::move(joint_vals));
  }
  result.q = result.h_joint - result.h_sep;
  return result;
}

std::pair<double, double> extract_features(const QualityResult& result) {
  if (result.status != MeasureStatus::Measured) {
    fail(ErrorCode::InsufficientData,
         "extract_features: pair was not measured (insufficient overlap)");
  }
  return {result.h_joint, result.h_sep};
}

}  // namespace coral
