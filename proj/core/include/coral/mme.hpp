#pragma once

#include <cstddef>

#include "coral/point_cloud.hpp"

namespace coral {

/// Mean per-point differential entropy of a single cloud at a fixed radius
/// with no determinant floor. Points with fewer than min_neighbors
/// neighbors (the point itself included) are skipped, as are points whose
/// neighborhood determinant is exactly zero.
/// Throws Error(InvalidParameter) when radius <= 0 and
/// Error(InsufficientData) when no point qualifies.
double mme(const PointCloud& cloud, double radius,
           std::size_t min_neighbors = 5);

}  // namespace coral
