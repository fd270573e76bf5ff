#include "cylsfm/datasets/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Geometry>

#include "cylsfm/core/error.hpp"
#include "cylsfm/core/parallel.hpp"
#include "cylsfm/core/rng.hpp"
#include "cylsfm/datasets/prepare.hpp"

namespace cylsfm {

namespace {

Eigen::Matrix3d yaw_matrix(double yaw) { return Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()).toRotationMatrix(); }

void put_color(Tensor& img, int r, int c, const Eigen::Vector3d& col) {
  for (int k = 0; k < 3; ++k) img(r, c, k) = col[k];
}

}  // namespace

CylinderScene CylinderScene::random(std::uint64_t seed, double radius, int waves_per_channel, int max_freq,
                                    int bands) {
  require(radius > 0.0, ErrorCode::BadArgument, "scene radius must be positive");
  require(waves_per_channel >= 0 && max_freq >= 1 && bands >= 0, ErrorCode::BadArgument, "bad texture parameters");
  Rng rng(seed);
  CylinderScene s;
  s.radius = radius;
  // Waves and bands together stay within +-0.45 of the base, so no clamping.
  const double wave_total = bands > 0 ? 0.25 : 0.4;
  const double amp_max = waves_per_channel > 0 ? wave_total / waves_per_channel : 0.0;
  for (int ch = 0; ch < 3; ++ch) {
    s.base[ch] = 0.5;
    for (int w = 0; w < waves_per_channel; ++w) {
      TextureWave wave;
      wave.amp = rng.uniform(0.4 * amp_max, amp_max);
      wave.freq_phi = 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(max_freq)));
      wave.freq_y = rng.uniform(-0.6, 0.6);
      wave.phase = rng.uniform(0.0, kTwoPi);
      s.waves[ch].push_back(wave);
    }
  }
  for (int b = 0; b < bands; ++b) {
    HorizontalBand band;
    // Alternate above and below the horizon, 0.2 to 0.5 radii away from it.
    band.y0 = (b % 2 == 0 ? 1.0 : -1.0) * rng.uniform(0.2, 0.5) * radius;
    band.width = 0.08 * radius;
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    for (int ch = 0; ch < 3; ++ch) band.amp[ch] = sign * rng.uniform(0.1, 0.2) / std::max(1, bands / 2);
    s.bands.push_back(band);
  }
  return s;
}

Eigen::Vector3d CylinderScene::color(double phi, double y) const {
  Eigen::Vector3d c;
  for (int ch = 0; ch < 3; ++ch) {
    double v = base[ch];
    for (const auto& w : waves[ch]) v += w.amp * std::sin(w.freq_phi * phi + w.freq_y * y + w.phase);
    for (const auto& b : bands) {
      const double u = (y - b.y0) / b.width;
      v += b.amp[ch] * std::exp(-u * u);
    }
    c[ch] = v;
  }
  return c;
}

double CylinderScene::intersect(const Eigen::Vector3d& o, const Eigen::Vector3d& dir) const {
  const double a = dir.x() * dir.x() + dir.z() * dir.z();
  const double b = 2.0 * (o.x() * dir.x() + o.z() * dir.z());
  const double c = o.x() * o.x() + o.z() * o.z() - radius * radius;
  if (c >= 0.0 || a < 1e-14) return std::numeric_limits<double>::quiet_NaN();
  return (-b + std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
}

RigidTransform CameraPlacement::camera_to_world() const { return {yaw_matrix(yaw), position}; }

RenderedView render_cylindrical(const CylinderScene& scene, const CylCamera& cam, const CameraPlacement& at) {
  cam.validate();
  RenderedView out{Tensor(cam.height, cam.width, 3), Tensor(cam.height, cam.width, 1)};
  const RigidTransform tf = at.camera_to_world();
  parallel_for(static_cast<std::size_t>(cam.height), [&](std::size_t row) {
    const int j = static_cast<int>(row);
    for (int i = 0; i < cam.width; ++i) {
      const Eigen::Vector3d dir = tf.R * cyl_ray(i, j, cam);
      const double s = scene.intersect(at.position, dir);
      require(std::isfinite(s), ErrorCode::BadArgument, "camera outside the scene cylinder");
      const Eigen::Vector3d p = at.position + s * dir;
      put_color(out.image, j, i, scene.color(std::atan2(p.x(), p.z()), p.y()));
      out.depth(j, i) = s;  // unit horizontal ray, so s is the radial depth
    }
  });
  return out;
}

std::array<RenderedView, 6> render_cube_faces(const CylinderScene& scene, const PinholeCamera& face,
                                              const CameraPlacement& at) {
  face.validate();
  const RigidTransform tf = at.camera_to_world();
  std::array<RenderedView, 6> faces;
  for (int f = 0; f < 6; ++f) {
    RenderedView& view = faces[f];
    view.image = Tensor(face.height, face.width, 3);
    view.depth = Tensor(face.height, face.width, 1);
    const Eigen::Matrix3d R = tf.R * cube_face_rotation(static_cast<CubeFace>(f));
    for (int v = 0; v < face.height; ++v) {
      for (int u = 0; u < face.width; ++u) {
        const Eigen::Vector3d dir = R * pinhole_unproject(u, v, 1.0, face);
        const double s = scene.intersect(at.position, dir);
        if (!std::isfinite(s)) {
          put_color(view.image, v, u, Eigen::Vector3d(scene.base[0], scene.base[1], scene.base[2]));
          continue;  // straight up or down: no wall hit, depth stays 0
        }
        const Eigen::Vector3d p = at.position + s * dir;
        put_color(view.image, v, u, scene.color(std::atan2(p.x(), p.z()), p.y()));
        view.depth(v, u) = s;  // face ray has unit z, so s is planar depth
      }
    }
  }
  return faces;
}

Tensor render_equirect(const CylinderScene& scene, int width, int height, const CameraPlacement& at) {
  require(width > 0 && height > 0, ErrorCode::BadArgument, "equirect size must be positive");
  Tensor img(height, width, 3);
  const RigidTransform tf = at.camera_to_world();
  for (int j = 0; j < height; ++j) {
    const double phi = kPi * (j + 0.5) / height - kPi / 2;
    for (int i = 0; i < width; ++i) {
      const double theta = kTwoPi * (i + 0.5) / width - kPi;
      const Eigen::Vector3d dir =
          tf.R * Eigen::Vector3d(std::cos(phi) * std::sin(theta), std::sin(phi), std::cos(phi) * std::cos(theta));
      const double s = scene.intersect(at.position, dir);
      if (!std::isfinite(s) || std::abs(phi) > 1.4) {
        put_color(img, j, i, Eigen::Vector3d(scene.base[0], scene.base[1], scene.base[2]));
        continue;
      }
      const Eigen::Vector3d p = at.position + s * dir;
      put_color(img, j, i, scene.color(std::atan2(p.x(), p.z()), p.y()));
    }
  }
  return img;
}

Pose6 relative_pose(const CameraPlacement& target, const CameraPlacement& source) {
  const RigidTransform tgt = target.camera_to_world();
  const RigidTransform src = source.camera_to_world();
  return transform_to_pose(src.inverse() * tgt);
}

ToyFrames toy_frames(const ToySetConfig& cfg, int index) {
  require(cfg.radius_lo > 0 && cfg.radius_hi >= cfg.radius_lo, ErrorCode::BadArgument, "bad radius range");
  require(cfg.max_offset >= 0 && cfg.max_offset < 0.8, ErrorCode::BadArgument, "max_offset must be in [0, 0.8)");
  require(cfg.band_height >= 0, ErrorCode::BadArgument, "band_height must be non-negative");
  require(cfg.heading_jitter >= 0, ErrorCode::BadArgument, "heading_jitter must be non-negative");
  Rng rng(cfg.seed * 1000003ULL + static_cast<std::uint64_t>(index));
  ToyFrames f;
  const double radius = rng.uniform(cfg.radius_lo, cfg.radius_hi);
  f.scene = CylinderScene::random(rng.next(), radius, cfg.waves_per_channel, cfg.max_freq, cfg.bands);
  if (cfg.band_height > 0.0)
    for (std::size_t b = 0; b < f.scene.bands.size(); ++b)
      f.scene.bands[b].y0 = (b % 2 == 0 ? 1.0 : -1.0) * cfg.band_height * radius;
  const double a = rng.uniform(-kPi, kPi);
  const double r = rng.uniform(0.0, cfg.max_offset) * radius;
  const double yaw = rng.uniform(-kPi, kPi);
  const double jitter = std::min(cfg.heading_jitter, kPi);
  const double dir = yaw + cfg.motion_heading + rng.uniform(-jitter, jitter);
  const Eigen::Vector3d center(r * std::sin(a), 0.0, r * std::cos(a));
  const Eigen::Vector3d step(cfg.baseline * std::sin(dir), 0.0, cfg.baseline * std::cos(dir));
  f.cameras = {CameraPlacement{center - step, yaw}, CameraPlacement{center, yaw}, CameraPlacement{center + step, yaw}};
  return f;
}

Snippet render_toy_snippet(const ToySetConfig& cfg, int index) {
  const ToyFrames f = toy_frames(cfg, index);
  const CylCamera cam = CylCamera::full(cfg.width, cfg.height);
  Snippet s;
  s.camera = cam;
  RenderedView target = render_cylindrical(f.scene, cam, f.cameras[1]);
  s.target = std::move(target.image);
  s.gt_depth = std::move(target.depth);
  for (int k : {0, 2}) {
    s.sources.push_back(render_cylindrical(f.scene, cam, f.cameras[k]).image);
    s.gt_poses.push_back(relative_pose(f.cameras[1], f.cameras[k]));
  }
  return s;
}

std::vector<Snippet> make_toy_snippets(const ToySetConfig& cfg) {
  require(cfg.count > 0, ErrorCode::BadArgument, "snippet count must be positive");
  std::vector<Snippet> out;
  for (int k = 0; k < cfg.count; ++k) out.push_back(render_toy_snippet(cfg, k));
  return out;
}

SyntheticSequence make_sequence(const SequenceConfig& cfg) {
  require(cfg.frames >= 1, ErrorCode::BadArgument, "sequence needs at least one frame");
  SyntheticSequence seq;
  seq.scene = CylinderScene::random(cfg.seed, cfg.radius, cfg.waves_per_channel, cfg.max_freq, cfg.bands);
  const Eigen::Vector3d dir(std::sin(cfg.heading), 0.0, std::cos(cfg.heading));
  for (int k = 0; k < cfg.frames; ++k) {
    const Eigen::Vector3d p = cfg.center + (k - 0.5 * (cfg.frames - 1)) * cfg.baseline * dir;
    require(std::hypot(p.x(), p.z()) < cfg.radius, ErrorCode::BadArgument, "camera path leaves the scene cylinder");
    seq.cameras.push_back({p, cfg.yaw});
  }
  return seq;
}

Snippet render_sequence_snippet(const SyntheticSequence& seq, const CylCamera& cam, int k) {
  require(k >= 1 && k + 1 < static_cast<int>(seq.cameras.size()), ErrorCode::BadArgument,
          "snippet centre must have a neighbour on both sides");
  Snippet s;
  s.camera = cam;
  RenderedView target = render_cylindrical(seq.scene, cam, seq.cameras[k]);
  s.target = std::move(target.image);
  s.gt_depth = std::move(target.depth);
  for (int j : {k - 1, k + 1}) {
    s.sources.push_back(render_cylindrical(seq.scene, cam, seq.cameras[j]).image);
    s.gt_poses.push_back(relative_pose(seq.cameras[k], seq.cameras[j]));
  }
  return s;
}

}  // namespace cylsfm
