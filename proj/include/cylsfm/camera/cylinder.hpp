#pragma once

#include <numbers>
#include <optional>

#include <Eigen/Core>

namespace cylsfm {

using Point3 = Eigen::Vector3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Default distance from the cylinder axis below which azimuth is undefined.
inline constexpr double kRadialEpsilon = 1e-9;

/// Wraps an angle into [-pi, pi).
double wrap_angle(double theta) noexcept;

/// Cylindrical panorama geometry.
///
/// Column i (pixel centers at integer i) spans azimuth band
/// [theta_start + span*i/W, theta_start + span*(i+1)/W); a full panorama has
/// theta_start = -pi and span = 2pi, so one image width equals 2pi of
/// azimuth. Row j maps to h = h_max * (2(j+0.5)/H - 1), +h pointing along +y
/// (downwards, like image rows). Cropped cameras keep h_max and narrow the
/// azimuth band; they no longer wrap.
struct CylCamera {
  int width = 0;
  int height = 0;
  double h_max = 0.0;
  double theta_start = -kPi;
  double theta_span = kTwoPi;

  /// Square pixels on the unit cylinder: h_max = pi * H / W.
  static CylCamera full(int width, int height);
  static CylCamera full(int width, int height, double h_max);

  bool wraps() const noexcept;

  /// Same field of view at integer-divided resolution.
  CylCamera downscaled(int factor) const;

  /// Throws BadArgument on non-positive sizes or h_max.
  void validate() const;

  bool operator==(const CylCamera&) const = default;
};

struct CylCoord {
  double theta = 0.0;
  double h = 0.0;
  double d = 0.0;
};

struct CylAngles {
  double theta = 0.0;
  double h = 0.0;
};

struct CylPixel {
  double i = 0.0;
  double j = 0.0;
  bool in_bounds = false;  // vertical: -0.5 < j < H - 0.5
  bool in_band = false;    // horizontal: always true for wrapping cameras
};

/// theta = atan2(x, z), h = y / sqrt(x^2 + z^2), d = sqrt(x^2 + z^2).
/// Throws DegenerateRay when d <= eps_radial.
CylCoord cyl_project(const Point3& p, double eps_radial = kRadialEpsilon);

/// Non-throwing form for inner loops; empty on the axis.
std::optional<CylCoord> try_cyl_project(const Point3& p, double eps_radial = kRadialEpsilon) noexcept;

/// (d sin theta, d h, d cos theta).
Point3 cyl_unproject(const CylCoord& q) noexcept;

/// Unit-radius ray (sin theta, h, cos theta) through continuous pixel (i, j).
Point3 cyl_ray(double i, double j, const CylCamera& cam) noexcept;

CylAngles pix_to_cyl(double i, double j, const CylCamera& cam) noexcept;

/// Horizontal output lies in [-0.5, W - 0.5) for wrapping cameras.
CylPixel cyl_to_pix(double theta, double h, const CylCamera& cam) noexcept;

}  // namespace cylsfm
