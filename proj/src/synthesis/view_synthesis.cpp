#include "cylsfm/synthesis/view_synthesis.hpp"

#include <cmath>

#include "cylsfm/core/error.hpp"

namespace cylsfm {

namespace {

// Row index far outside any image; the sampler treats it as invalid.
constexpr double kInvalidRow = -1e6;

void check_synth_inputs(const Tensor& source, const Tensor& depth, const CylCamera& cam) {
  require(depth.channels() == 1, ErrorCode::ShapeMismatch, "depth map must have one channel");
  require(source.rows() == depth.rows() && source.cols() == depth.cols(), ErrorCode::ShapeMismatch,
          "source image and depth map differ in size");
  require(depth.rows() == cam.height && depth.cols() == cam.width, ErrorCode::ShapeMismatch,
          "depth map does not match camera size");
}

}  // namespace

Tensor warp_coordinates(const Tensor& target_depth, const Pose6& pose, const CylCamera& cam) {
  require(target_depth.rows() == cam.height && target_depth.cols() == cam.width, ErrorCode::ShapeMismatch,
          "depth map does not match camera size");
  const RigidTransform tf = pose_to_transform(pose);
  Tensor coords(cam.height, cam.width, 2);
  for (int r = 0; r < cam.height; ++r)
    for (int c = 0; c < cam.width; ++c) {
      const Point3 x = target_depth(r, c) * cyl_ray(c, r, cam);
      const auto q = try_cyl_project(tf.apply(x));
      if (!q) {
        coords(r, c, 0) = 0.0;
        coords(r, c, 1) = kInvalidRow;
        continue;
      }
      const CylPixel px = cyl_to_pix(q->theta, q->h, cam);
      coords(r, c, 0) = px.i;
      coords(r, c, 1) = px.j;
    }
  return coords;
}

SynthResult synthesize_view(const Tensor& source, const Tensor& target_depth, const Pose6& pose,
                            const CylCamera& cam) {
  return synthesize_view(source, target_depth, pose, cam, seam_of(cam));
}

SynthResult synthesize_view(const Tensor& source, const Tensor& target_depth, const Pose6& pose,
                            const CylCamera& cam, Seam seam) {
  check_synth_inputs(source, target_depth, cam);
  SynthResult res;
  res.coords = warp_coordinates(target_depth, pose, cam);
  SampleResult s = bilinear_sample(source, res.coords, seam);
  res.projected = std::move(s.samples);
  res.valid = std::move(s.valid);
  return res;
}

SynthGrads synthesize_view_backward(const Tensor& source, const Tensor& target_depth, const Pose6& pose,
                                    const CylCamera& cam, const SynthResult& forward,
                                    const Tensor& grad_projected) {
  return synthesize_view_backward(source, target_depth, pose, cam, forward, grad_projected, seam_of(cam));
}

SynthGrads synthesize_view_backward(const Tensor& source, const Tensor& target_depth, const Pose6& pose,
                                    const CylCamera& cam, const SynthResult& forward,
                                    const Tensor& grad_projected, Seam seam) {
  check_synth_inputs(source, target_depth, cam);
  const SampleGrads sg = bilinear_sample_backward(source, forward.coords, seam, grad_projected);
  const RigidTransform tf = pose_to_transform(pose);
  const auto dR = rotation_jacobian(pose);
  const double di_dtheta = cam.width / cam.theta_span;
  const double dj_dh = 0.5 * cam.height / cam.h_max;

  SynthGrads g{Tensor(cam.height, cam.width, 1), Pose6{}};
  for (int r = 0; r < cam.height; ++r)
    for (int c = 0; c < cam.width; ++c) {
      if (forward.valid(r, c) == 0.0) continue;
      const double gi = sg.coords(r, c, 0);
      const double gj = sg.coords(r, c, 1);
      if (gi == 0.0 && gj == 0.0) continue;
      const Point3 ray = cyl_ray(c, r, cam);
      const Point3 x = target_depth(r, c) * ray;
      const Point3 y = tf.apply(x);
      const double rho2 = y.x() * y.x() + y.z() * y.z();
      const double rho = std::sqrt(rho2);
      const double g_theta = gi * di_dtheta;
      const double g_h = gj * dj_dh;
      const Eigen::Vector3d dtheta(y.z() / rho2, 0.0, -y.x() / rho2);
      const Eigen::Vector3d dh(-y.y() * y.x() / (rho2 * rho), 1.0 / rho, -y.y() * y.z() / (rho2 * rho));
      const Eigen::Vector3d gy = g_theta * dtheta + g_h * dh;
      g.depth(r, c) = gy.dot(tf.R * ray);
      g.pose.t += gy;
      for (int k = 0; k < 3; ++k) g.pose.r[k] += gy.dot(dR[static_cast<std::size_t>(k)] * x);
    }
  return g;
}

}  // namespace cylsfm
