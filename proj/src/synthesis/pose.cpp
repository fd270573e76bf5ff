#include "cylsfm/synthesis/pose.hpp"

#include <algorithm>
#include <cmath>

namespace cylsfm {

namespace {

Eigen::Matrix3d rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Eigen::Matrix3d m;
  m << 1, 0, 0, 0, c, -s, 0, s, c;
  return m;
}

Eigen::Matrix3d rot_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Eigen::Matrix3d m;
  m << c, 0, s, 0, 1, 0, -s, 0, c;
  return m;
}

Eigen::Matrix3d rot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Eigen::Matrix3d m;
  m << c, -s, 0, s, c, 0, 0, 0, 1;
  return m;
}

Eigen::Matrix3d d_rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Eigen::Matrix3d m;
  m << 0, 0, 0, 0, -s, -c, 0, c, -s;
  return m;
}

Eigen::Matrix3d d_rot_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Eigen::Matrix3d m;
  m << -s, 0, c, 0, 0, 0, -c, 0, -s;
  return m;
}

Eigen::Matrix3d d_rot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Eigen::Matrix3d m;
  m << -s, -c, 0, c, -s, 0, 0, 0, 0;
  return m;
}

}  // namespace

Pose6 Pose6::from_array(const std::array<double, 6>& v) {
  Pose6 p;
  p.t = {v[0], v[1], v[2]};
  p.r = {v[3], v[4], v[5]};
  return p;
}

std::array<double, 6> Pose6::to_array() const { return {t.x(), t.y(), t.z(), r.x(), r.y(), r.z()}; }

RigidTransform pose_to_transform(const Pose6& p) {
  return {rot_z(p.r.z()) * rot_y(p.r.y()) * rot_x(p.r.x()), p.t};
}

std::array<Eigen::Matrix3d, 3> rotation_jacobian(const Pose6& p) {
  const Eigen::Matrix3d rx = rot_x(p.r.x()), ry = rot_y(p.r.y()), rz = rot_z(p.r.z());
  return {rz * ry * d_rot_x(p.r.x()), rz * d_rot_y(p.r.y()) * rx, d_rot_z(p.r.z()) * ry * rx};
}

Pose6 transform_to_pose(const RigidTransform& tf) {
  const Eigen::Matrix3d& R = tf.R;
  Pose6 p;
  p.t = tf.t;
  const double beta = std::asin(std::clamp(-R(2, 0), -1.0, 1.0));
  p.r = {std::atan2(R(2, 1), R(2, 2)), beta, std::atan2(R(1, 0), R(0, 0))};
  return p;
}

}  // namespace cylsfm
