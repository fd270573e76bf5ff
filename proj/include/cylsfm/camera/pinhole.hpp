#pragma once

#include "cylsfm/camera/cylinder.hpp"

namespace cylsfm {

/// Pinhole camera with pixel centers at integer coordinates.
struct PinholeCamera {
  double f = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  /// Square image with the given horizontal field of view (degrees) and the
  /// principal point at the image center.
  static PinholeCamera from_fov(double fov_deg, int width, int height);

  void validate() const;
};

struct PinholePixel {
  double u = 0.0;
  double v = 0.0;
  bool in_front = false;
};

/// u = f x/z + cx, v = f y/z + cy. in_front is false (and u, v are zero)
/// when z <= 0.
PinholePixel pinhole_project(const Point3& p, const PinholeCamera& cam) noexcept;

Point3 pinhole_unproject(double u, double v, double z, const PinholeCamera& cam) noexcept;

}  // namespace cylsfm
