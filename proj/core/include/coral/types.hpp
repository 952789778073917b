#pragma once

#include <Eigen/Core>

namespace coral {

using Point3 = Eigen::Vector3d;

/// Rigid body motion p -> R p + t with a right-handed orthonormal rotation.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }

  Point3 apply(const Point3& p) const { return rotation * p + translation; }

  /// this after other: apply(other.apply(p)).
  RigidTransform compose(const RigidTransform& other) const {
    return {rotation * other.rotation, rotation * other.translation + translation};
  }

  RigidTransform inverse() const {
    Eigen::Matrix3d rt = rotation.transpose();
    return {rt, -(rt * translation)};
  }

  /// max(|R^T R - I|_max, |det R - 1|). Zero for an exact rotation.
  double orthonormality_error() const;

  bool is_valid(double tol = 1e-9) const { return orthonormality_error() <= tol; }

  /// Throws Error(InvalidTransform) when the rotation is not orthonormal
  /// within tol.
  void require_valid(double tol = 1e-9) const;
};

}  // namespace coral
