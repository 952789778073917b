#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "coral/point_cloud.hpp"

namespace coral {

enum class Aggregation { Mean, Median };

/// Tuning knobs of the dual-entropy alignment measure.
struct EntropyParams {
  double r_min = 0.3;   // m; fixed-radius mode sets r_min == r_max
  double r_max = 0.3;   // m
  double alpha = 0.0;   // rad; sensor vertical angular resolution, 0 disables
                        // distance-dependent radius growth
  double epsilon = 0.0;     // determinant floor inside the entropy log
  double e_reject = 0.0;    // fraction of lowest separate entropies discarded
  double min_overlap = 0.10;  // pairs below this overlap ratio are declared
                              // misaligned without measuring
  Aggregation aggregation = Aggregation::Mean;
  std::size_t min_neighbors = 5;

  void validate() const;  // throws Error(InvalidParameter)
};

/// Second moments of one neighborhood: unbiased covariance (divisor n-1),
/// eigenvalues sorted descending and clamped at zero, and their product.
struct CovarianceSummary {
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
  Eigen::Vector3d eigenvalues = Eigen::Vector3d::Zero();
  double determinant = 0.0;
  std::size_t neighbor_count = 0;
};

/// Throws Error(DegenerateNeighborhood) for fewer than two points.
CovarianceSummary sample_covariance(std::span<const Point3> neighbors);

/// 0.5 ln(2 pi e det + epsilon). Returns -infinity when the argument is
/// zero (det = 0 with epsilon = 0); such points are treated as invalid.
/// Throws Error(NumericalDegeneracy) when det < 0.
double point_entropy(double det, double epsilon);

/// clamp(d sin(alpha), r_min, r_max) with d = |p - sensor_origin|.
double dynamic_radius(const Point3& p, const Point3& sensor_origin,
                      const EntropyParams& params);

/// Fraction of points (over both clouds) that have at least one neighbor
/// within their per-point radius in the other cloud.
double overlap_ratio(const PointCloud& a, const PointCloud& b,
                     const EntropyParams& params);

enum class MeasureStatus { Measured, InsufficientOverlap };

struct PerPointEntropy {
  std::uint32_t point_index = 0;  // position in join(a, b) order
  double separate_entropy = 0.0;
  double joint_entropy = 0.0;
  double q = 0.0;  // joint - separate
  bool valid = false;
  double radius_used = 0.0;
};

struct QualityResult {
  MeasureStatus status = MeasureStatus::InsufficientOverlap;
  double h_sep = 0.0;
  double h_joint = 0.0;
  double q = 0.0;  // h_joint - h_sep
  double overlap_ratio = 0.0;
  /// One entry per joint-cloud point. Non-overlapping points and points
  /// with too few neighbors carry valid = false.
  std::vector<PerPointEntropy> per_point;
  /// per_point indices that survived outlier rejection and fed the
  /// aggregates, ascending.
  std::vector<std::uint32_t> retained;
};

/// The measure proper. Pipeline: overlap gate, restriction to overlapping
/// points, per-point separate/joint entropies at a shared per-point radius,
/// rejection of the e_reject fraction with the lowest separate entropy, then
/// mean or median aggregation of both entropy columns over the same
/// retained set.
/// Throws Error(InvalidInput) on an empty cloud and Error(InsufficientData)
/// when no valid points remain.
QualityResult coral_quality(const PointCloud& a, const PointCloud& b,
                            const EntropyParams& params);

/// Classifier inputs (x1, x2) = (h_joint, h_sep).
/// Throws Error(InsufficientData) unless status == Measured; callers must
/// bypass the model and report misaligned in that case.
std::pair<double, double> extract_features(const QualityResult& result);

}  // namespace coral
