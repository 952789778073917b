#include "coral/ndt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "coral/entropy.hpp"
#include "coral/error.hpp"
#include "coral/parallel.hpp"

namespace coral {

namespace {

constexpr double kGaussNorm3d = 0.063493635934240969;  // (2 pi)^{-3/2}
constexpr double kEigenFloorRatio = 1e-3;  // floor for lesser eigenvalues
constexpr int kCoordBits = 21;             // packed grid coordinate width
constexpr std::int64_t kCoordOffset = 1 << 20;

}  // namespace

void NdtParams::validate() const {
  if (!(voxel_size > 0.0)) {
    fail(ErrorCode::InvalidParameter, "ndt: voxel_size must be > 0");
  }
  if (min_cell_points < 2) {
    fail(ErrorCode::InvalidParameter, "ndt: min_cell_points must be >= 2");
  }
}

double NdtCell::density(const Point3& p) const {
  Point3 d = p - mean;
  double m = d.dot(inverse_covariance * d);
  return normalization * std::exp(-0.5 * m);
}

std::uint64_t NdtGrid::pack(const Eigen::Vector3i& gc) {
  std::uint64_t key = 0;
  for (int axis = 0; axis < 3; ++axis) {
    std::int64_t shifted = static_cast<std::int64_t>(gc[axis]) + kCoordOffset;
    if (shifted < 0 || shifted >= (std::int64_t{1} << kCoordBits)) {
      fail(ErrorCode::InvalidInput, "ndt: grid coordinate out of range");
    }
    key = (key << kCoordBits) | static_cast<std::uint64_t>(shifted);
  }
  return key;
}

Eigen::Vector3i NdtGrid::cell_coordinates(const Point3& p) const {
  return Eigen::Vector3i(
      static_cast<int>(std::floor(p.x() / voxel_size_)),
      static_cast<int>(std::floor(p.y() / voxel_size_)),
      static_cast<int>(std::floor(p.z() / voxel_size_)));
}

const NdtCell* NdtGrid::cell_at(const Eigen::Vector3i& gc) const {
  auto it = cells_.find(pack(gc));
  return it == cells_.end() ? nullptr : &it->second;
}

const NdtCell* NdtGrid::nearest_cell_in_neighborhood(const Point3& p) const {
  const Eigen::Vector3i center = cell_coordinates(p);
  const NdtCell* best = nullptr;
  double best_d2 = std::numeric_limits<double>::infinity();
  // Fixed scan order makes ties resolve to the lowest grid coordinate.
  for (int dx = -1; dx <= 1; ++dx) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dz = -1; dz <= 1; ++dz) {
        const NdtCell* cell =
            cell_at(center + Eigen::Vector3i(dx, dy, dz));
        if (cell == nullptr) continue;
        double d2 = (cell->mean - p).squaredNorm();
        if (d2 < best_d2) {
          best_d2 = d2;
          best = cell;
        }
      }
    }
  }
  return best;
}

std::vector<const NdtCell*> NdtGrid::cells_sorted() const {
  std::vector<const NdtCell*> out;
  out.reserve(cells_.size());
  for (const auto& [key, cell] : cells_) out.push_back(&cell);
  std::sort(out.begin(), out.end(), [](const NdtCell* l, const NdtCell* r) {
    const auto& a = l->grid_coordinates;
    const auto& b = r->grid_coordinates;
    if (a.x() != b.x()) return a.x() < b.x();
    if (a.y() != b.y()) return a.y() < b.y();
    return a.z() < b.z();
  });
  return out;
}

NdtGrid build_ndt(const PointCloud& cloud, const NdtParams& params) {
  params.validate();
  if (cloud.empty()) {
    fail(ErrorCode::InvalidInput, "build_ndt: empty cloud");
  }

  NdtGrid grid;
  grid.voxel_size_ = params.voxel_size;

  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>,
                     NdtGrid::KeyHash>
      buckets;
  buckets.reserve(cloud.size() / 4 + 1);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    buckets[NdtGrid::pack(grid.cell_coordinates(cloud.points[i]))].push_back(
        static_cast<std::uint32_t>(i));
  }

  for (const auto& [key, indices] : buckets) {
    if (indices.size() < params.min_cell_points) continue;

    const std::size_t n = indices.size();
    Point3 mean = Point3::Zero();
    for (std::uint32_t idx : indices) mean += cloud.points[idx];
    mean /= static_cast<double>(n);

    Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
    for (std::uint32_t idx : indices) {
      Point3 d = cloud.points[idx] - mean;
      scatter += d * d.transpose();
    }
    Eigen::Matrix3d cov = scatter / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    Eigen::Vector3d ev = solver.eigenvalues().cwiseMax(0.0);  // ascending
    double largest = ev(2);
    if (!(largest > 0.0)) continue;  // all points coincident, no density
    double floor_value = kEigenFloorRatio * largest;
    ev = ev.cwiseMax(floor_value);

    NdtCell cell;
    cell.mean = mean;
    cell.point_count = n;
    const Eigen::Matrix3d& basis = solver.eigenvectors();
    cell.covariance = basis * ev.asDiagonal() * basis.transpose();
    cell.inverse_covariance =
        basis * ev.cwiseInverse().asDiagonal() * basis.transpose();
    cell.determinant = ev(0) * ev(1) * ev(2);
    cell.normalization = kGaussNorm3d / std::sqrt(cell.determinant);
    cell.grid_coordinates =
        grid.cell_coordinates(cloud.points[indices.front()]);

    grid.cells_.emplace(key, cell);
  }
  return grid;
}

namespace {

/// Per-point cell assignment shared by the score and the feature pair.
struct PointAssignments {
  std::vector<double> density;   // NaN where the point does not overlap
  std::vector<double> cell_det;  // determinant of the cell actually used
};

PointAssignments assign_cells(const NdtGrid& grid, const PointCloud& b) {
  PointAssignments out;
  const std::size_t n = b.size();
  out.density.assign(n, std::numeric_limits<double>::quiet_NaN());
  out.cell_det.assign(n, std::numeric_limits<double>::quiet_NaN());
  parallel_for_blocks(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const NdtCell* cell = grid.nearest_cell_in_neighborhood(b.points[i]);
      if (cell == nullptr) continue;
      out.density[i] = cell->density(b.points[i]);
      out.cell_det[i] = cell->determinant;
    }
  });
  return out;
}

}  // namespace

NdtScore ndt_score(const NdtGrid& grid, const PointCloud& b) {
  if (grid.empty()) {
    fail(ErrorCode::InvalidInput, "ndt_score: empty grid");
  }
  if (b.empty()) {
    fail(ErrorCode::InvalidInput, "ndt_score: empty cloud");
  }

  PointAssignments assignments = assign_cells(grid, b);
  NdtScore score;
  double sum = 0.0;
  for (double d : assignments.density) {
    if (std::isfinite(d)) {
      sum += d;
      ++score.overlapping;
    }
  }
  if (score.overlapping == 0) {
    score.no_overlap = true;
    score.score = 0.0;
    return score;
  }
  score.score = sum / static_cast<double>(score.overlapping);
  return score;
}

RelNdtFeatures relndt_features(const NdtGrid& grid, const PointCloud& b,
                               double epsilon) {
  if (grid.empty()) {
    fail(ErrorCode::InvalidInput, "relndt_features: empty grid");
  }
  if (b.empty()) {
    fail(ErrorCode::InvalidInput, "relndt_features: empty cloud");
  }

  PointAssignments assignments = assign_cells(grid, b);
  double density_sum = 0.0;
  double entropy_sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < assignments.density.size(); ++i) {
    if (!std::isfinite(assignments.density[i])) continue;
    density_sum += assignments.density[i];
    entropy_sum += point_entropy(assignments.cell_det[i], epsilon);
    ++count;
  }

  RelNdtFeatures features;
  if (count == 0) {
    features.no_overlap = true;
    return features;  // (0, 0) with the flag set
  }
  features.x1 = density_sum / static_cast<double>(count);
  features.x2 = entropy_sum / static_cast<double>(count);
  return features;
}

}  // namespace coral
