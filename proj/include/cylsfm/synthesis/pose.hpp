#pragma once

#include <array>

#include <Eigen/Core>

namespace cylsfm {

/// Rigid motion from the target frame into a source frame:
/// X_source = R * X_target + t, with R = Rz(gamma) * Ry(beta) * Rx(alpha)
/// and r = (alpha, beta, gamma) in radians.
struct Pose6 {
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  Eigen::Vector3d r = Eigen::Vector3d::Zero();

  static Pose6 from_array(const std::array<double, 6>& v);
  std::array<double, 6> to_array() const;

  double& operator[](int k) { return k < 3 ? t[k] : r[k - 3]; }
  double operator[](int k) const { return k < 3 ? t[k] : r[k - 3]; }

  Pose6& operator+=(const Pose6& o) {
    t += o.t;
    r += o.r;
    return *this;
  }
};

struct RigidTransform {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& x) const { return R * x + t; }

  /// Source camera center in target coordinates (the X with R X + t = 0).
  Eigen::Vector3d source_origin_in_target() const { return -R.transpose() * t; }

  RigidTransform inverse() const { return {R.transpose(), -R.transpose() * t}; }

  RigidTransform operator*(const RigidTransform& o) const { return {R * o.R, R * o.t + t}; }
};

RigidTransform pose_to_transform(const Pose6& p);

/// Partial derivatives of R with respect to alpha, beta, gamma.
std::array<Eigen::Matrix3d, 3> rotation_jacobian(const Pose6& p);

/// Inverse of pose_to_transform for proper rotations (ZYX Euler angles).
Pose6 transform_to_pose(const RigidTransform& tf);

}  // namespace cylsfm
