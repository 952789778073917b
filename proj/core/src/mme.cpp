#include "coral/mme.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "coral/error.hpp"
#include "coral/kd_tree.hpp"
#include "coral/parallel.hpp"
#include "detail/covariance.hpp"

namespace coral {

double mme(const PointCloud& cloud, double radius,
           std::size_t min_neighbors) {
  if (!(radius > 0.0)) {
    fail(ErrorCode::InvalidParameter, "mme: radius must be > 0");
  }
  if (cloud.empty()) {
    fail(ErrorCode::InvalidInput, "mme: empty cloud");
  }

  const KdTree index(cloud.points);
  const std::size_t n = cloud.size();
  std::vector<double> entropies(n, std::numeric_limits<double>::quiet_NaN());

  parallel_for_blocks(n, [&](std::size_t begin, std::size_t end) {
    std::vector<std::uint32_t> neighbors;
    for (std::size_t i = begin; i < end; ++i) {
      index.radius_search(cloud.points[i], radius, neighbors);
      if (neighbors.size() < min_neighbors) continue;
      double det = detail::covariance_of(cloud.points, neighbors).determinant;
      double h = point_entropy(det, 0.0);
      if (std::isfinite(h)) entropies[i] = h;
    }
  });

  double sum = 0.0;
  std::size_t count = 0;
  for (double h : entropies) {
    if (std::isfinite(h)) {
      sum += h;
      ++count;
    }
  }
  if (count == 0) {
    fail(ErrorCode::InsufficientData, "mme: no point has a usable neighborhood");
  }
  return sum / static_cast<double>(count);
}

}  // namespace coral
