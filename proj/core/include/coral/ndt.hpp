#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "coral/point_cloud.hpp"

namespace coral {

struct NdtParams {
  double voxel_size = 0.6;          // m
  std::size_t min_cell_points = 6;  // sparser voxels stay unoccupied
  void validate() const;            // throws Error(InvalidParameter)
};

/// Gaussian summary of one occupied voxel. The covariance is regularized
/// (eigenvalues floored at 1e-3 of the largest) so the density is well
/// defined on planar and linear cells.
struct NdtCell {
  Point3 mean = Point3::Zero();
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
  std::size_t point_count = 0;
  Eigen::Vector3i grid_coordinates = Eigen::Vector3i::Zero();

  // cached for density evaluation
  Eigen::Matrix3d inverse_covariance = Eigen::Matrix3d::Zero();
  double determinant = 0.0;
  double normalization = 0.0;  // (2 pi)^{-3/2} det^{-1/2}

  /// Normalized multivariate Gaussian density at p.
  double density(const Point3& p) const;
};

class NdtGrid {
 public:
  NdtGrid() = default;

  double voxel_size() const { return voxel_size_; }
  std::size_t cell_count() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }

  Eigen::Vector3i cell_coordinates(const Point3& p) const;
  const NdtCell* cell_at(const Eigen::Vector3i& gc) const;

  /// Occupied cell with the mean closest to p among p's own voxel and its
  /// 26 surrounding voxels; ties broken by grid coordinate order. Null when
  /// the whole neighborhood is unoccupied.
  const NdtCell* nearest_cell_in_neighborhood(const Point3& p) const;

  /// Cells ordered by grid coordinates (stable, for iteration in tests and
  /// reports).
  std::vector<const NdtCell*> cells_sorted() const;

 private:
  friend NdtGrid build_ndt(const PointCloud&, const NdtParams&);

  struct KeyHash {
    std::size_t operator()(const std::uint64_t& k) const noexcept {
      std::uint64_t x = k;
      x ^= x >> 33;
      x *= 0xff51afd7ed558ccdULL;
      x ^= x >> 33;
      return static_cast<std::size_t>(x);
    }
  };
  static std::uint64_t pack(const Eigen::Vector3i& gc);

  double voxel_size_ = 0.0;
  std::unordered_map<std::uint64_t, NdtCell, KeyHash> cells_;
};

/// Voxelizes `cloud` and keeps a Gaussian per voxel holding at least
/// min_cell_points points. Cells whose covariance collapses to zero even
/// after regularization (all points coincident) are dropped.
/// Throws Error(InvalidInput) on an empty cloud.
NdtGrid build_ndt(const PointCloud& cloud, const NdtParams& params);

struct NdtScore {
  double score = 0.0;           // mean cell density over overlapping points
  std::size_t overlapping = 0;  // points in or next to an occupied voxel
  bool no_overlap = false;      // nothing overlapped; score forced to 0
};

/// Mean Gaussian density of b's overlapping points under the grid, where a
/// point overlaps when its own voxel or one of the 26 surrounding voxels is
/// occupied and the density is taken from the nearest such cell.
NdtScore ndt_score(const NdtGrid& grid, const PointCloud& b);

struct RelNdtFeatures {
  double x1 = 0.0;  // ndt score
  double x2 = 0.0;  // mean entropy of the cells used per point
  bool no_overlap = false;
};

/// The score plus the mean differential entropy 0.5 ln(2 pi e det + epsilon)
/// of the cell each overlapping point was scored against.
RelNdtFeatures relndt_features(const NdtGrid& grid, const PointCloud& b,
                               double epsilon);

}  // namespace coral
