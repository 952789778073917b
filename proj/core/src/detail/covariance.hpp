#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "coral/entropy.hpp"

namespace coral::detail {

/// Unbiased covariance (divisor n-1) of the points selected by pick(0..n-1),
/// two-pass about the neighborhood mean; eigenvalues clamped at zero before
/// the determinant product. Requires n >= 2.
template <typename Pick>
CovarianceSummary covariance_impl(std::size_t n, Pick&& pick) {
  CovarianceSummary out;
  out.neighbor_count = n;

  Point3 mean = Point3::Zero();
  for (std::size_t i = 0; i < n; ++i) mean += pick(i);
  mean /= static_cast<double>(n);

  double xx = 0, xy = 0, xz = 0, yy = 0, yz = 0, zz = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Point3 d = pick(i) - mean;
    xx += d.x() * d.x();
    xy += d.x() * d.y();
    xz += d.x() * d.z();
    yy += d.y() * d.y();
    yz += d.y() * d.z();
    zz += d.z() * d.z();
  }
  const double inv = 1.0 / static_cast<double>(n - 1);
  out.covariance << xx * inv, xy * inv, xz * inv,
                    xy * inv, yy * inv, yz * inv,
                    xz * inv, yz * inv, zz * inv;

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver;
  solver.compute(out.covariance, Eigen::EigenvaluesOnly);
  Eigen::Vector3d ev = solver.eigenvalues();  // ascending
  out.eigenvalues = Eigen::Vector3d(std::max(ev(2), 0.0), std::max(ev(1), 0.0),
                                    std::max(ev(0), 0.0));
  out.determinant =
      out.eigenvalues(0) * out.eigenvalues(1) * out.eigenvalues(2);
  return out;
}

inline CovarianceSummary covariance_of(const std::vector<Point3>& points,
                                       std::span<const std::uint32_t> indices) {
  return covariance_impl(indices.size(), [&](std::size_t i) -> const Point3& {
    return points[indices[i]];
  });
}

}  // namespace coral::detail
