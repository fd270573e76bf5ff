#pragma once

#include <array>
#include <filesystem>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "cylsfm/camera/cylinder.hpp"
#include "cylsfm/camera/pinhole.hpp"
#include "cylsfm/synthesis/pose.hpp"
#include "cylsfm/tensor/tensor.hpp"

namespace cylsfm {

struct Vertex {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d color = Eigen::Vector3d::Zero();
};

struct Mesh {
  std::vector<Vertex> vertices;
  std::vector<std::array<int, 3>> triangles;
};

/// One vertex per pixel at (d sin theta, d h, d cos theta), row-major, and two
/// triangles per 2x2 pixel quad. Full panoramas also close the seam, giving
/// 2 W (H - 1) triangles. Throws NonPositiveDepth.
Mesh build_mesh(const Tensor& pano, const Tensor& depth, const CylCamera& cam);

/// ASCII PLY with float positions and 8-bit vertex colors.
void write_ply(const std::filesystem::path& path, const Mesh& mesh);

using VirtualCamera = std::variant<PinholeCamera, CylCamera>;

struct RenderResult {
  Tensor image;  // rows x cols x 3, zero where nothing was drawn
  Tensor depth;  // planar z (pinhole) or radial distance (cylindrical)
  Tensor valid;  // 1 where a triangle covered the pixel
};

/// Z-buffered rasterization without shading. `eye` places the virtual camera
/// in mesh coordinates: X_mesh = R X_eye + t. Colors use perspective-correct
/// interpolation. Triangles reaching behind a pinhole camera are dropped.
RenderResult render_view(const Mesh& mesh, const Pose6& eye, const VirtualCamera& camera);

struct StereoPair {
  Tensor left;
  Tensor right;
  double radius = 0.0;
};

/// Omnidirectional stereo: output column theta is rendered from an eye offset
/// by +-radius along (cos theta, 0, -sin theta) (right eye +), looking along
/// (sin theta, 0, cos theta). Throws EyeInsideGeometry when radius reaches
/// the nearest vertex's distance from the vertical axis.
StereoPair render_ods(const Mesh& mesh, double radius, const CylCamera& cam);

/// Red from the left eye's luminance, green and blue from the right eye's
/// (Rec. 601 weights).
Tensor anaglyph(const StereoPair& pair);

}  // namespace cylsfm
