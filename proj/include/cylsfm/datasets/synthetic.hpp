#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "cylsfm/camera/cylinder.hpp"
#include "cylsfm/camera/pinhole.hpp"
#include "cylsfm/estimation/snippet.hpp"
#include "cylsfm/synthesis/pose.hpp"
#include "cylsfm/tensor/tensor.hpp"

namespace cylsfm {

/// One sinusoidal texture component: amp * sin(freq_phi * phi + freq_y * y + phase).
struct TextureWave {
  double amp = 0.0;
  int freq_phi = 1;  // integer so the texture is periodic around the axis
  double freq_y = 0.0;
  double phase = 0.0;
};

/// Horizontal stripe at a fixed world height: amp * exp(-((y - y0) / width)^2).
/// Its image row moves with distance (h = y / d), a monocular depth cue.
struct HorizontalBand {
  double y0 = 0.0;
  double width = 0.5;
  std::array<double, 3> amp{0.0, 0.0, 0.0};
};

/// Textured vertical cylinder x^2 + z^2 = radius^2 (world frame, +y down).
///
/// Texture is a smooth function of world azimuth and height, so it crosses the
/// panorama seam without discontinuity and bilinear resampling stays accurate.
struct CylinderScene {
  double radius = 5.0;
  std::array<double, 3> base{0.5, 0.5, 0.5};
  std::array<std::vector<TextureWave>, 3> waves;
  std::vector<HorizontalBand> bands;

  /// Random low-frequency texture. max_freq bounds the azimuthal frequency.
  static CylinderScene random(std::uint64_t seed, double radius, int waves_per_channel = 4, int max_freq = 4,
                              int bands = 0);

  Eigen::Vector3d color(double phi, double y) const;

  /// Distance along a ray with unit horizontal component; NaN when the ray
  /// starts outside the cylinder.
  double intersect(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir) const;
};

/// Camera placement: X_world = R_y(yaw) * X_camera + position.
struct CameraPlacement {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double yaw = 0.0;

  RigidTransform camera_to_world() const;
};

struct RenderedView {
  Tensor image;  // rows x cols x 3 in [0, 1]
  Tensor depth;  // radial (cylindrical) or planar (pinhole) depth
};

RenderedView render_cylindrical(const CylinderScene& scene, const CylCamera& cam, const CameraPlacement& at);

/// Cube faces in the order front, back, left, right, up, down.
std::array<RenderedView, 6> render_cube_faces(const CylinderScene& scene, const PinholeCamera& face,
                                              const CameraPlacement& at);

/// Full-sphere equirectangular image (color only); rows span elevation
/// [-pi/2, pi/2] top to bottom. Near-vertical rays get the base color.
Tensor render_equirect(const CylinderScene& scene, int width, int height, const CameraPlacement& at);

/// Relative pose taking target-camera coordinates to source-camera ones.
Pose6 relative_pose(const CameraPlacement& target, const CameraPlacement& source);

/// Family of three-frame toy snippets: a random textured cylinder per
/// snippet, the camera off the axis at a random yaw, moving `baseline` per
/// frame in a random horizontal direction.
struct ToySetConfig {
  int count = 50;
  int width = 128;
  int height = 32;
  double baseline = 0.1;
  double radius_lo = 4.0;
  double radius_hi = 6.0;
  double max_offset = 0.3;  // camera distance from the axis, as a fraction of the radius
  // Motion direction in the camera frame (0 = forward, along +z). The default
  // moves sideways so the seam at theta = +-pi sees full parallax instead of
  // sitting on the epipole.
  double motion_heading = 1.5707963267948966;
  // Random spread around motion_heading in radians; >= pi gives uniformly
  // random directions.
  double heading_jitter = 0.2;
  int waves_per_channel = 4;
  int max_freq = 4;
  int bands = 2;
  // Bands sit this many radii above and below the horizon, so a band's image
  // row is a per-column depth cue. Zero keeps the random heights.
  double band_height = 0.3;
  std::uint64_t seed = 0;
};

struct ToyFrames {
  CylinderScene scene;
  std::array<CameraPlacement, 3> cameras;  // previous, target, next
};

/// The scene and camera path of toy snippet `index`.
ToyFrames toy_frames(const ToySetConfig& cfg, int index);

/// Renders a toy snippet with ground-truth depth and poses.
Snippet render_toy_snippet(const ToySetConfig& cfg, int index);

std::vector<Snippet> make_toy_snippets(const ToySetConfig& cfg);

/// Straight camera path through one textured cylinder: frame k sits at
/// center + (k - (frames - 1) / 2) * baseline * (sin heading, 0, cos heading).
struct SequenceConfig {
  int frames = 3;
  double radius = 5.0;
  double baseline = 0.1;
  Eigen::Vector3d center{0.8, 0.0, -0.6};
  double heading = 1.5707963267948966;  // world azimuth of the motion, 0 = +z
  double yaw = 0.0;
  int waves_per_channel = 4;
  int max_freq = 4;
  int bands = 0;
  std::uint64_t seed = 3;
};

struct SyntheticSequence {
  CylinderScene scene;
  std::vector<CameraPlacement> cameras;
};

/// Throws BadArgument when a camera leaves the cylinder.
SyntheticSequence make_sequence(const SequenceConfig& cfg);

/// Frames (k - 1, k, k + 1) rendered at cam, with ground truth.
Snippet render_sequence_snippet(const SyntheticSequence& seq, const CylCamera& cam, int k);

}  // namespace cylsfm
