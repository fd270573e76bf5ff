#include "cylsfm/datasets/prepare.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>

#include "cylsfm/core/error.hpp"
#include "cylsfm/core/parallel.hpp"
#include "cylsfm/tensor/wrap_ops.hpp"

namespace cylsfm {

namespace {

// Bilinear sample with edge clamping; (u, v) are pixel-center coordinates.
void sample_clamped(const Tensor& img, double u, double v, double* out) {
  const double x = std::clamp(u, 0.0, img.cols() - 1.0);
  const double y = std::clamp(v, 0.0, img.rows() - 1.0);
  const int x0 = std::min(static_cast<int>(x), img.cols() - 2 < 0 ? 0 : img.cols() - 2);
  const int y0 = std::min(static_cast<int>(y), img.rows() - 2 < 0 ? 0 : img.rows() - 2);
  const int x1 = std::min(x0 + 1, img.cols() - 1);
  const int y1 = std::min(y0 + 1, img.rows() - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  for (int k = 0; k < img.channels(); ++k)
    out[k] = (1 - fy) * ((1 - fx) * img(y0, x0, k) + fx * img(y0, x1, k)) +
             fy * ((1 - fx) * img(y1, x0, k) + fx * img(y1, x1, k));
}

}  // namespace

Eigen::Matrix3d cube_face_rotation(CubeFace face) {
  using Eigen::AngleAxisd;
  using Eigen::Vector3d;
  switch (face) {
    case CubeFace::Front: return Eigen::Matrix3d::Identity();
    case CubeFace::Back: return AngleAxisd(kPi, Vector3d::UnitY()).toRotationMatrix();
    case CubeFace::Left: return AngleAxisd(-kPi / 2, Vector3d::UnitY()).toRotationMatrix();
    case CubeFace::Right: return AngleAxisd(kPi / 2, Vector3d::UnitY()).toRotationMatrix();
    case CubeFace::Up: return AngleAxisd(kPi / 2, Vector3d::UnitX()).toRotationMatrix();
    case CubeFace::Down: return AngleAxisd(-kPi / 2, Vector3d::UnitX()).toRotationMatrix();
  }
  return Eigen::Matrix3d::Identity();
}

void CubeFaceSet::validate() const {
  camera.validate();
  require(camera.width == camera.height, ErrorCode::ShapeMismatch, "cube faces must be square");
  // Half the image width must subtend more than 45 degrees.
  require(0.5 * camera.width > camera.f, ErrorCode::BadFov, "cube faces need a field of view above 90 degrees");
  for (int f = 0; f < 6; ++f) {
    require(faces[f].rows() == camera.height && faces[f].cols() == camera.width && faces[f].channels() == 3,
            ErrorCode::ShapeMismatch, "cube face does not match the face camera");
    if (has_depth())
      require(depth[f].rows() == camera.height && depth[f].cols() == camera.width && depth[f].channels() == 1,
              ErrorCode::ShapeMismatch, "depth face does not match the face camera");
  }
}

Panorama stitch_cubemap(const CubeFaceSet& set, const CylCamera& cam) {
  set.validate();
  cam.validate();
  std::array<Eigen::Matrix3d, 6> rot;
  for (int f = 0; f < 6; ++f) rot[f] = cube_face_rotation(static_cast<CubeFace>(f));
  Panorama out;
  out.image = Tensor(cam.height, cam.width, 3);
  if (set.has_depth()) out.depth = Tensor(cam.height, cam.width, 1);
  const PinholeCamera& pc = set.camera;
  parallel_for(cam.height, [&](int j) {
    for (int i = 0; i < cam.width; ++i) {
      const Point3 ray = cyl_ray(i, j, cam);
      int best = 0;
      double best_dot = -1e300;
      for (int f = 0; f < 6; ++f) {
        const double d = rot[f].col(2).dot(ray);
        if (d > best_dot) {
          best_dot = d;
          best = f;
        }
      }
      const Point3 q = rot[best].transpose() * ray;
      const PinholePixel px = pinhole_project(q, pc);
      require(px.in_front && px.u > -0.5 && px.u < pc.width - 0.5 && px.v > -0.5 && px.v < pc.height - 0.5,
              ErrorCode::CoverageGap, "panorama ray falls outside every cube face");
      sample_clamped(set.faces[best], px.u, px.v, out.image.ptr(j, i));
      if (set.has_depth()) {
        double z = 0.0;
        sample_clamped(set.depth[best], px.u, px.v, &z);
        // The ray has unit radial length, so the point z * ray / q.z is z / q.z
        // from the axis.
        out.depth(j, i) = z / q.z();
      }
    }
  });
  return out;
}

Tensor equirect_to_cyl(const Tensor& equirect, const CylCamera& cam) {
  cam.validate();
  require(!equirect.empty(), ErrorCode::BadArgument, "empty equirectangular image");
  const int We = equirect.cols();
  const int He = equirect.rows();
  Tensor coords(cam.height, cam.width, 2);
  for (int j = 0; j < cam.height; ++j)
    for (int i = 0; i < cam.width; ++i) {
      const CylAngles a = pix_to_cyl(i, j, cam);
      const double phi = std::atan(a.h);
      coords(j, i, 0) = (a.theta + kPi) / kTwoPi * We - 0.5;
      coords(j, i, 1) = (phi + kPi / 2) / kPi * He - 0.5;
    }
  return bilinear_sample(equirect, coords, Seam::Wrap).samples;
}

std::vector<int> filter_static(const std::vector<Pose6>& world_poses, double tau) {
  require(tau >= 0.0, ErrorCode::BadArgument, "static threshold must be non-negative");
  std::vector<int> kept;
  for (std::size_t k = 0; k < world_poses.size(); ++k)
    if (k == 0 || (world_poses[k].t - world_poses[k - 1].t).norm() >= tau) kept.push_back(static_cast<int>(k));
  return kept;
}

Crop crop_fov(const Tensor& panorama, const CylCamera& cam, double fov_deg, double center_theta) {
  require(fov_deg > 0.0 && fov_deg <= 360.0, ErrorCode::BadFov, "crop FOV must lie in (0, 360]");
  require(cam.wraps(), ErrorCode::BadArgument, "crop_fov expects a full panorama");
  require(panorama.rows() == cam.height && panorama.cols() == cam.width, ErrorCode::ShapeMismatch,
          "panorama does not match its camera");
  const int W = cam.width;
  const int width = static_cast<int>(std::lround(W * fov_deg / 360.0));
  require(width >= 1, ErrorCode::BadFov, "crop narrower than one column");
  if (width == W) return {panorama, cam, 0};
  const double center_col = wrap_angle(center_theta - cam.theta_start - kPi) / kTwoPi * W + 0.5 * W;
  const int first = static_cast<int>(std::lround(center_col - 0.5 * width));
  Crop out;
  out.first_column = first;
  out.image = Tensor(cam.height, width, panorama.channels());
  for (int r = 0; r < cam.height; ++r)
    for (int c = 0; c < width; ++c) {
      const int src = ((first + c) % W + W) % W;
      for (int k = 0; k < panorama.channels(); ++k) out.image(r, c, k) = panorama(r, src, k);
    }
  out.camera = cam;
  out.camera.width = width;
  out.camera.theta_span = cam.theta_span * width / W;
  out.camera.theta_start = wrap_angle(cam.theta_start + cam.theta_span * first / W);
  return out;
}

}  // namespace cylsfm
