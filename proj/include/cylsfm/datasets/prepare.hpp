#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "cylsfm/camera/cylinder.hpp"
#include "cylsfm/camera/pinhole.hpp"
#include "cylsfm/synthesis/pose.hpp"
#include "cylsfm/tensor/tensor.hpp"

namespace cylsfm {

enum class CubeFace { Front, Back, Left, Right, Up, Down };

/// Rotation taking face-camera coordinates to rig coordinates.
Eigen::Matrix3d cube_face_rotation(CubeFace face);

/// Six square faces in CubeFace order sharing one pinhole camera. depth is
/// either empty or six planar-depth maps matching the faces.
struct CubeFaceSet {
  std::array<Tensor, 6> faces;
  std::array<Tensor, 6> depth;
  PinholeCamera camera;

  bool has_depth() const noexcept { return !depth[0].empty(); }
  /// Throws ShapeMismatch for unequal or non-square faces, BadFov for FOV <= 90.
  void validate() const;
};

struct Panorama {
  Tensor image;
  Tensor depth;  // radial depth; empty without depth faces
};

/// Cylindrical panorama from a cube rig. Each output ray is taken from the
/// face whose optical axis is closest to it; planar face depth becomes radial.
Panorama stitch_cubemap(const CubeFaceSet& faces, const CylCamera& cam);

/// Full-sphere equirectangular image (azimuth across, elevation -pi/2..pi/2
/// down the rows) warped to a cylindrical camera.
Tensor equirect_to_cyl(const Tensor& equirect, const CylCamera& cam);

/// Frames whose camera moved at least tau since the previous frame of the
/// input sequence; frame 0 is always kept.
std::vector<int> filter_static(const std::vector<Pose6>& world_poses, double tau);

struct Crop {
  Tensor image;
  CylCamera camera;
  int first_column = 0;  // in the input, may be negative when the band wraps
};

/// Contiguous band of round(W * fov / 360) columns centred at azimuth
/// center_theta, wrapping across the seam. fov = 360 returns the input.
Crop crop_fov(const Tensor& panorama, const CylCamera& cam, double fov_deg, double center_theta);

}  // namespace cylsfm
