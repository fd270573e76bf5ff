#include "cylsfm/camera/pinhole.hpp"

#include <cmath>

#include "cylsfm/core/error.hpp"

namespace cylsfm {

PinholeCamera PinholeCamera::from_fov(double fov_deg, int width, int height) {
  require(fov_deg > 0.0 && fov_deg < 180.0, ErrorCode::BadArgument, "pinhole FOV must lie in (0, 180)");
  PinholeCamera cam;
  cam.width = width;
  cam.height = height;
  cam.f = 0.5 * width / std::tan(0.5 * fov_deg * kPi / 180.0);
  cam.cx = 0.5 * (width - 1);
  cam.cy = 0.5 * (height - 1);
  cam.validate();
  return cam;
}

void PinholeCamera::validate() const {
  require(width > 0 && height > 0, ErrorCode::BadArgument, "camera dimensions must be positive");
  require(f > 0.0 && std::isfinite(f), ErrorCode::BadArgument, "focal length must be positive");
}

PinholePixel pinhole_project(const Point3& p, const PinholeCamera& cam) noexcept {
  if (!(p.z() > 0.0)) return {};
  return {cam.f * p.x() / p.z() + cam.cx, cam.f * p.y() / p.z() + cam.cy, true};
}

Point3 pinhole_unproject(double u, double v, double z, const PinholeCamera& cam) noexcept {
  return {(u - cam.cx) * z / cam.f, (v - cam.cy) * z / cam.f, z};
}

}  // namespace cylsfm
