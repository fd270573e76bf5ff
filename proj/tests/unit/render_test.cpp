#include <cmath>
#include <filesystem>
#include <algorithm>
#include <fstream>

#include <gtest/gtest.h>

#include "cylsfm/core/error.hpp"
#include "cylsfm/render/vr.hpp"
#include "oracles.hpp"

namespace cylsfm {
namespace {

double masked_mae(const Tensor& a, const Tensor& b, const Tensor& valid) {
  double s = 0.0;
  long n = 0;
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < a.cols(); ++c) {
      if (valid(r, c) == 0.0) continue;
      for (int k = 0; k < a.channels(); ++k) s += std::abs(a(r, c, k) - b(r, c, k));
      n += a.channels();
    }
  return n ? s / n : 0.0;
}

TEST(BuildMesh, VertexPositionFollowsUnitCylinder) {
  const CylCamera cam = CylCamera::full(129, 33);
  Tensor depth(33, 129, 1, 1.0);
  depth(16, 64) = 2.0;  // theta = 0, h = 0
  const Mesh m = build_mesh(Tensor(33, 129, 3), depth, cam);
  const Eigen::Vector3d p = m.vertices[16 * 129 + 64].position;
  EXPECT_NEAR(p.x(), 0.0, 1e-15);
  EXPECT_NEAR(p.y(), 0.0, 1e-15);
  EXPECT_NEAR(p.z(), 2.0, 1e-15);
}

TEST(BuildMesh, CountsIncludeSeamQuads) {
  const Mesh m = build_mesh(Tensor(2, 4, 3), Tensor(2, 4, 1, 1.0), CylCamera::full(4, 2));
  EXPECT_EQ(m.vertices.size(), 8u);
  EXPECT_EQ(m.triangles.size(), 8u);
  for (const auto& t : m.triangles)
    for (int v : t) {
      EXPECT_GE(v, 0);
      EXPECT_LT(v, 8);
    }
}

TEST(BuildMesh, ConstantDepthGivesConstantRadius) {
  const CylCamera cam = CylCamera::full(64, 16);
  const Mesh m = build_mesh(oracle::random_tensor(16, 64, 3, 1, 0, 1), Tensor(16, 64, 1, 3.5), cam);
  for (const Vertex& v : m.vertices) EXPECT_NEAR(std::hypot(v.position.x(), v.position.z()), 3.5, 1e-12);
}

TEST(BuildMesh, RejectsNonPositiveDepth) {
  Tensor depth(2, 4, 1, 1.0);
  depth(1, 2) = 0.0;
  try {
    build_mesh(Tensor(2, 4, 3), depth, CylCamera::full(4, 2));
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveDepth);
  }
}

TEST(BuildMesh, PlyHeaderAndCounts) {
  const auto dir = std::filesystem::temp_directory_path() / "cylsfm_tests";
  std::filesystem::create_directories(dir);
  const Mesh m = build_mesh(Tensor(2, 4, 3, 0.5), Tensor(2, 4, 1, 1.0), CylCamera::full(4, 2));
  write_ply(dir / "m.ply", m);
  std::ifstream in(dir / "m.ply");
  std::string line;
  int lines = 0;
  bool vertex = false, face = false;
  while (std::getline(in, line)) {
    ++lines;
    vertex |= line == "element vertex 8";
    face |= line == "element face 8";
  }
  EXPECT_TRUE(vertex);
  EXPECT_TRUE(face);
  EXPECT_EQ(lines, 12 + 8 + 8);
}

TEST(RenderView, SelfReprojectionReproducesPanorama) {
  const CylCamera cam = CylCamera::full(128, 32);
  const oracle::AnalyticView v = oracle::render_cylinder(cam, Eigen::Vector3d(0.5, 0.1, -0.3), 4.0);
  const Mesh m = build_mesh(v.image, v.depth, cam);
  const RenderResult r = render_view(m, Pose6{}, cam);
  long covered = 0;
  for (double x : r.valid.values()) covered += x != 0.0;
  EXPECT_EQ(covered, 128 * 32);
  EXPECT_LT(masked_mae(r.image, v.image, r.valid), 2.0 / 255);
  for (std::size_t k = 0; k < v.depth.size(); ++k) EXPECT_NEAR(r.depth.data()[k], v.depth.data()[k], 1e-9);
}

TEST(RenderView, ConstantCylinderDepthBuffer) {
  const CylCamera src = CylCamera::full(64, 16);
  const Mesh m = build_mesh(Tensor(16, 64, 3, 0.5), Tensor(16, 64, 1, 5.0), src);
  const CylCamera out = CylCamera::full(100, 20, src.h_max * 0.9);
  const RenderResult r = render_view(m, Pose6{}, out);
  for (int j = 0; j < 20; ++j)
    for (int i = 0; i < 100; ++i) {
      ASSERT_EQ(r.valid(j, i), 1.0);
      EXPECT_NEAR(r.depth(j, i), 5.0, 0.05);
    }
}

Mesh quad(double z, double half, const Eigen::Vector3d& color) {
  Mesh m;
  for (double y : {-half, half})
    for (double x : {-half, half}) m.vertices.push_back({Eigen::Vector3d(x, y, z), color});
  m.triangles = {{0, 1, 2}, {1, 3, 2}};
  return m;
}

int covered(const RenderResult& r) {
  int n = 0;
  for (double v : r.valid.values()) n += v != 0.0;
  return n;
}

TEST(RenderView, MovingTowardPlaneGrowsItsImage) {
  const Mesh m = quad(5.0, 0.5, Eigen::Vector3d(1, 0, 0));
  const PinholeCamera cam = PinholeCamera::from_fov(60.0, 64, 64);
  Pose6 far, near;
  near.t.z() = 2.0;
  const int a = covered(render_view(m, far, cam));
  const int b = covered(render_view(m, near, cam));
  EXPECT_GT(a, 0);
  EXPECT_GT(b, a);
}

TEST(RenderView, NearerQuadWins) {
  Mesh m = quad(6.0, 1.0, Eigen::Vector3d(0, 0, 1));
  const Mesh front = quad(3.0, 0.3, Eigen::Vector3d(1, 0, 0));
  for (const auto& v : front.vertices) m.vertices.push_back(v);
  for (auto t : front.triangles) m.triangles.push_back({t[0] + 4, t[1] + 4, t[2] + 4});
  const PinholeCamera cam = PinholeCamera::from_fov(60.0, 48, 48);
  // Draw order must not matter.
  Mesh reversed = m;
  std::reverse(reversed.triangles.begin(), reversed.triangles.end());
  for (const Mesh* mm : {&m, &reversed}) {
    const RenderResult r = render_view(*mm, Pose6{}, cam);
    int red = 0;
    for (int j = 0; j < 48; ++j)
      for (int i = 0; i < 48; ++i) {
        if (r.valid(j, i) == 0.0) continue;
        if (r.depth(j, i) < 4.0) {
          ++red;
          EXPECT_NEAR(r.image(j, i, 0), 1.0, 1e-12);
        } else {
          EXPECT_NEAR(r.image(j, i, 2), 1.0, 1e-12);
        }
      }
    EXPECT_GT(red, 0);
    EXPECT_NEAR(r.depth(24, 24), 3.0, 1e-9);
  }
}

TEST(RenderView, PerspectiveCorrectInterpolation) {
  // A plane receding in depth: the image midpoint between the ends is not the
  // 3D midpoint, so screen-linear interpolation would get its color wrong.
  Mesh m;
  m.vertices = {{Eigen::Vector3d(-1, -1, 2), Eigen::Vector3d(0, 0, 0)},
                {Eigen::Vector3d(-1, 1, 2), Eigen::Vector3d(0, 0, 0)},
                {Eigen::Vector3d(1, -1, 6), Eigen::Vector3d(1, 1, 1)},
                {Eigen::Vector3d(1, 1, 6), Eigen::Vector3d(1, 1, 1)}};
  m.triangles = {{0, 2, 1}, {2, 3, 1}};
  PinholeCamera cam;
  cam.f = 20;
  cam.cx = 20;
  cam.cy = 20;
  cam.width = 41;
  cam.height = 41;
  const RenderResult r = render_view(m, Pose6{}, cam);
  // Pixel column u sees x/z = (u - 20) / 20; on the plane x = (z - 4) / 2.
  for (int u = 12; u <= 22; ++u) {
    const double s = (u - 20) / 20.0;
    const double z = 4.0 / (1.0 - 2.0 * s);
    const double x = (z - 4.0) / 2.0;
    ASSERT_EQ(r.valid(20, u), 1.0);
    EXPECT_NEAR(r.image(20, u, 0), (x + 1.0) / 2.0, 1e-9) << u;
    EXPECT_NEAR(r.depth(20, u), z, 1e-9);
  }
}

TEST(RenderView, EmptyMeshGivesBackground) {
  const RenderResult r = render_view(Mesh{}, Pose6{}, CylCamera::full(8, 4));
  EXPECT_EQ(covered(r), 0);
}

Tensor stripe_panorama(const CylCamera& cam, double phi) {
  Tensor img(cam.height, cam.width, 3, 0.0);
  for (int j = 0; j < cam.height; ++j)
    for (int i = 0; i < cam.width; ++i) {
      const double d = wrap_angle(pix_to_cyl(i, j, cam).theta - phi);
      const double v = std::exp(-0.5 * std::pow(d / 0.03, 2));
      for (int k = 0; k < 3; ++k) img(j, i, k) = v;
    }
  return img;
}

// Intensity-weighted column of the stripe in row j, unwrapped around `near`.
double stripe_column(const Tensor& img, int j, double near) {
  const int W = img.cols();
  double s = 0, sw = 0;
  for (int i = 0; i < W; ++i) {
    double x = i;
    while (x - near > W / 2.0) x -= W;
    while (near - x > W / 2.0) x += W;
    s += img(j, i, 0) * x;
    sw += img(j, i, 0);
  }
  return s / sw;
}

TEST(RenderOds, DisparityMatchesAnalyticOffset) {
  const CylCamera cam = CylCamera::full(256, 16);
  const double d = 4.0, r = 0.5, phi = 0.7;
  const Mesh m = build_mesh(stripe_panorama(cam, phi), Tensor(16, 256, 1, d), cam);
  const StereoPair pair = render_ods(m, r, cam);
  const double col = (phi + kPi) / kTwoPi * 256 - 0.5;
  const double expected = 2.0 * std::asin(r / d) * 256 / kTwoPi;
  const double left = stripe_column(pair.left, 8, col);
  const double right = stripe_column(pair.right, 8, col);
  EXPECT_NEAR(std::abs(left - right), expected, 1.0);
}

TEST(RenderOds, TinyRadiusIsMonoscopic) {
  const CylCamera cam = CylCamera::full(64, 16);
  const oracle::AnalyticView v = oracle::render_cylinder(cam, Eigen::Vector3d(0.3, 0.0, 0.2), 3.0);
  const Mesh m = build_mesh(v.image, v.depth, cam);
  const StereoPair pair = render_ods(m, 1e-9, cam);
  const RenderResult mono = render_view(m, Pose6{}, cam);
  for (std::size_t k = 0; k < mono.image.size(); ++k) {
    EXPECT_LT(std::abs(pair.left.data()[k] - mono.image.data()[k]), 1.0 / 255);
    EXPECT_LT(std::abs(pair.right.data()[k] - mono.image.data()[k]), 1.0 / 255);
  }
}

TEST(RenderOds, SeamColumnsAreContinuous) {
  const CylCamera cam = CylCamera::full(128, 16);
  const oracle::AnalyticView v = oracle::render_cylinder(cam, Eigen::Vector3d(0.2, 0.0, -0.4), 4.0);
  const StereoPair pair = render_ods(build_mesh(v.image, v.depth, cam), 0.3, cam);
  for (const Tensor* t : {&pair.left, &pair.right}) {
    std::vector<double> diffs;
    double seam = 0;
    for (int i = 0; i < 128; ++i) {
      double s = 0;
      for (int j = 0; j < 16; ++j)
        for (int k = 0; k < 3; ++k) s += std::abs((*t)(j, (i + 1) % 128, k) - (*t)(j, i, k));
      if (i == 127)
        seam = s;
      else
        diffs.push_back(s);
    }
    std::nth_element(diffs.begin(), diffs.begin() + diffs.size() / 2, diffs.end());
    EXPECT_LT(seam, 2.0 * diffs[diffs.size() / 2]);
  }
}

TEST(RenderOds, EyeInsideGeometry) {
  const CylCamera cam = CylCamera::full(16, 4);
  const Mesh m = build_mesh(Tensor(4, 16, 3), Tensor(4, 16, 1, 0.5), cam);
  try {
    render_ods(m, 1.0, cam);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EyeInsideGeometry);
  }
}

TEST(Anaglyph, ChannelDefinition) {
  StereoPair gray{Tensor(2, 2, 3, 0.4), Tensor(2, 2, 3, 0.4), 1.0};
  const Tensor g = anaglyph(gray);
  for (double v : g.values()) EXPECT_NEAR(v, 0.4, 1e-12);
  StereoPair wb{Tensor(2, 2, 3, 1.0), Tensor(2, 2, 3, 0.0), 1.0};
  const Tensor red = anaglyph(wb);
  EXPECT_NEAR(red(0, 0, 0), 1.0, 1e-15);
  EXPECT_EQ(red(0, 0, 1), 0.0);
  EXPECT_EQ(red(0, 0, 2), 0.0);
  StereoPair bw{Tensor(2, 2, 3, 0.0), Tensor(2, 2, 3, 1.0), 1.0};
  const Tensor cyan = anaglyph(bw);
  EXPECT_EQ(cyan(1, 1, 0), 0.0);
  EXPECT_NEAR(cyan(1, 1, 1), 1.0, 1e-15);
  EXPECT_NEAR(cyan(1, 1, 2), 1.0, 1e-15);
  try {
    anaglyph({Tensor(2, 2, 3), Tensor(2, 3, 3), 1.0});
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
  }
}

}  // namespace
}  // namespace cylsfm
