#include "cylsfm/camera/cylinder.hpp"

#include <cmath>

#include "cylsfm/core/error.hpp"

namespace cylsfm {

double wrap_angle(double theta) noexcept {
  double t = std::fmod(theta + kPi, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  t -= kPi;
  // fmod can land exactly on +pi after rounding.
  if (t >= kPi) t -= kTwoPi;
  return t;
}

CylCamera CylCamera::full(int width, int height) {
  return full(width, height, kPi * static_cast<double>(height) / static_cast<double>(width));
}

CylCamera CylCamera::full(int width, int height, double h_max) {
  CylCamera cam;
  cam.width = width;
  cam.height = height;
  cam.h_max = h_max;
  cam.validate();
  return cam;
}

bool CylCamera::wraps() const noexcept { return theta_span >= kTwoPi - 1e-12; }

CylCamera CylCamera::downscaled(int factor) const {
  require(factor > 0 && width % factor == 0 && height % factor == 0, ErrorCode::ShapeMismatch,
          "camera size not divisible by scale factor");
  CylCamera cam = *this;
  cam.width /= factor;
  cam.height /= factor;
  return cam;
}

void CylCamera::validate() const {
  require(width > 0 && height > 0, ErrorCode::BadArgument, "camera dimensions must be positive");
  require(h_max > 0.0 && std::isfinite(h_max), ErrorCode::BadArgument, "h_max must be positive");
  require(theta_span > 0.0 && theta_span <= kTwoPi + 1e-12, ErrorCode::BadArgument,
          "azimuth span must lie in (0, 2pi]");
}

std::optional<CylCoord> try_cyl_project(const Point3& p, double eps_radial) noexcept {
  const double d = std::hypot(p.x(), p.z());
  if (!(d > eps_radial)) return std::nullopt;
  return CylCoord{std::atan2(p.x(), p.z()), p.y() / d, d};
}

CylCoord cyl_project(const Point3& p, double eps_radial) {
  auto q = try_cyl_project(p, eps_radial);
  if (!q) throw Error(ErrorCode::DegenerateRay, "point lies on the cylinder axis");
  return *q;
}

Point3 cyl_unproject(const CylCoord& q) noexcept {
  return {q.d * std::sin(q.theta), q.d * q.h, q.d * std::cos(q.theta)};
}

Point3 cyl_ray(double i, double j, const CylCamera& cam) noexcept {
  const CylAngles a = pix_to_cyl(i, j, cam);
  return {std::sin(a.theta), a.h, std::cos(a.theta)};
}

CylAngles pix_to_cyl(double i, double j, const CylCamera& cam) noexcept {
  const double theta = cam.theta_start + cam.theta_span * (i + 0.5) / cam.width;
  const double h = cam.h_max * (2.0 * (j + 0.5) / cam.height - 1.0);
  return {wrap_angle(theta), h};
}

CylPixel cyl_to_pix(double theta, double h, const CylCamera& cam) noexcept {
  const double half = 0.5 * cam.theta_span;
  const double delta = wrap_angle(theta - cam.theta_start - half);
  CylPixel px;
  px.i = (delta + half) * cam.width / cam.theta_span - 0.5;
  px.j = (h / cam.h_max + 1.0) * 0.5 * cam.height - 0.5;
  if (cam.wraps()) {
    // Rounding can push the seam sample to W - 0.5; fold it back.
    if (px.i >= cam.width - 0.5) px.i -= cam.width;
    px.in_band = true;
  } else {
    px.in_band = px.i >= -0.5 && px.i <= cam.width - 0.5;
  }
  px.in_bounds = px.j > -0.5 && px.j < cam.height - 0.5;
  return px;
}

}  // namespace cylsfm
