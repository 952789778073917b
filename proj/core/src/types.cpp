#include "coral/types.hpp"

#include <cmath>

#include "coral/error.hpp"

namespace coral {

double RigidTransform::orthonormality_error() const {
  Eigen::Matrix3d gram = rotation.transpose() * rotation;
  double err = (gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  double det_err = std::abs(rotation.determinant() - 1.0);
  return std::max(err, det_err);
}

void RigidTransform::require_valid(double tol) const {
  if (!rotation.allFinite() || !translation.allFinite()) {
    fail(ErrorCode::InvalidTransform, "transform has non-finite entries");
  }
  double err = orthonormality_error();
  if (err > tol) {
    fail(ErrorCode::InvalidTransform,
         "rotation is not orthonormal (error " + std::to_string(err) + ")");
  }
}

}  // namespace coral
