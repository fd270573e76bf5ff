#include <cmath>
#include <random>

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include "cylsfm/camera/cylinder.hpp"
#include "cylsfm/camera/pinhole.hpp"
#include "cylsfm/core/error.hpp"

namespace cylsfm {
namespace {

TEST(CylProject, AxisExamples) {
  const CylCoord fwd = cyl_project({0, 0, 1});
  EXPECT_DOUBLE_EQ(fwd.theta, 0.0);
  EXPECT_DOUBLE_EQ(fwd.h, 0.0);
  EXPECT_DOUBLE_EQ(fwd.d, 1.0);

  const CylCoord right = cyl_project({1, 0, 0});
  EXPECT_DOUBLE_EQ(right.theta, kPi / 2);
  EXPECT_DOUBLE_EQ(right.h, 0.0);
  EXPECT_DOUBLE_EQ(right.d, 1.0);
}

TEST(CylProject, HandEvaluatedPoint) {
  // sqrt(3^2 + 4^2) = 5
  const CylCoord q = cyl_project({3, 4, 4});
  EXPECT_NEAR(q.theta, 0.6435011087932844, 1e-12);
  EXPECT_NEAR(q.h, 0.8, 1e-15);
  EXPECT_NEAR(q.d, 5.0, 1e-15);
}

TEST(CylProject, RearHemisphereUsesFullAzimuth) {
  EXPECT_NEAR(cyl_project({0, 0, -2}).theta, kPi, 1e-15);
  EXPECT_NEAR(cyl_project({-1, 0, -1}).theta, -3 * kPi / 4, 1e-15);
}

TEST(CylProject, AxisPointIsDegenerate) {
  try {
    cyl_project({0, 3, 0});
    FAIL() << "expected DegenerateRay";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateRay);
  }
  EXPECT_THROW(cyl_project({1e-10, 0, 0}), Error);
  EXPECT_FALSE(try_cyl_project({0, 1, 0}).has_value());
}

TEST(CylUnproject, Examples) {
  const Point3 a = cyl_unproject({0, 0, 1});
  EXPECT_EQ(a, Point3(0, 0, 1));
  const Point3 b = cyl_unproject({kPi / 2, 0, 2});
  EXPECT_NEAR(b.x(), 2, 1e-15);
  EXPECT_NEAR(b.z(), 0, 1e-15);
  const Point3 c = cyl_unproject({std::atan2(3.0, 4.0), 0.8, 5});
  EXPECT_NEAR((c - Point3(3, 4, 4)).norm(), 0.0, 1e-14);
}

TEST(CylProject, RoundtripRandomPoints) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> angle(-kPi, kPi), height(-3, 3), radial(0.1, 100);
  for (int n = 0; n < 10000; ++n) {
    const Point3 p = cyl_unproject({angle(gen), height(gen), radial(gen)});
    const Point3 back = cyl_unproject(cyl_project(p));
    ASSERT_LT((back - p).norm(), 1e-9 * p.norm());
  }
}

TEST(CylProject, YawEquivariance) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-10, 10), yaw(-4, 4);
  for (int n = 0; n < 1000; ++n) {
    const Point3 p(u(gen), u(gen), u(gen));
    const double delta = yaw(gen);
    const Eigen::Matrix3d Ry = Eigen::AngleAxisd(delta, Eigen::Vector3d::UnitY()).toRotationMatrix();
    const CylCoord a = cyl_project(Ry * p);
    const CylCoord b = cyl_project(p);
    EXPECT_NEAR(wrap_angle(a.theta - (b.theta + delta)), 0.0, 1e-12);
    EXPECT_NEAR(a.h, b.h, 1e-12);
    EXPECT_NEAR(a.d, b.d, 1e-12 * b.d);
  }
}

TEST(CylProject, HeightIsTangentOfElevation) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int n = 0; n < 500; ++n) {
    const Point3 p(u(gen), u(gen), u(gen));
    const double elevation = std::atan2(p.y(), std::hypot(p.x(), p.z()));
    EXPECT_NEAR(cyl_project(p).h, std::tan(elevation), 1e-12 * (1 + std::abs(std::tan(elevation))));
  }
}

TEST(PixelMapping, CenterAndFirstColumn) {
  const CylCamera cam = CylCamera::full(512, 128, kPi / 4);
  const CylAngles c = pix_to_cyl(255.5, 63.5, cam);
  EXPECT_NEAR(c.theta, 0.0, 1e-15);
  EXPECT_NEAR(c.h, 0.0, 1e-15);
  // Column 0's center sits half a column (pi/512) right of the seam.
  const CylAngles first = pix_to_cyl(0, 63.5, cam);
  EXPECT_NEAR(first.theta, kPi / 512 - kPi, 1e-15);
  EXPECT_NEAR(first.h, 0.0, 1e-15);
  // Continuous column 0.5 is one full column (pi/256) from the seam.
  EXPECT_NEAR(pix_to_cyl(0.5, 63.5, cam).theta, kPi / 256 - kPi, 1e-15);
}

TEST(PixelMapping, SeamCornerIsOutOfBoundsVertically) {
  const CylCamera cam = CylCamera::full(512, 128, kPi / 4);
  const CylPixel px = cyl_to_pix(-kPi, -kPi / 4, cam);
  // -0.5 and 511.5 are the same seam position on the wrapped grid.
  EXPECT_DOUBLE_EQ(px.i, -0.5);
  EXPECT_DOUBLE_EQ(std::fmod(px.i + 512.0, 512.0), 511.5);
  EXPECT_DOUBLE_EQ(px.j, -0.5);
  EXPECT_FALSE(px.in_bounds);
}

TEST(PixelMapping, MutualInverse) {
  const CylCamera cam = CylCamera::full(96, 24);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> ui(-0.5, 95.5), uj(-0.4, 23.4);
  for (int n = 0; n < 2000; ++n) {
    const double i = ui(gen), j = uj(gen);
    const CylAngles a = pix_to_cyl(i, j, cam);
    const CylPixel p = cyl_to_pix(a.theta, a.h, cam);
    EXPECT_NEAR(p.i, i, 1e-12);
    EXPECT_NEAR(p.j, j, 1e-12);
    EXPECT_TRUE(p.in_bounds);
  }
}

TEST(PixelMapping, SquarePixelsByDefault) {
  const CylCamera cam = CylCamera::full(512, 128);
  EXPECT_DOUBLE_EQ(cam.h_max, kPi / 4);
  const double dtheta = kTwoPi / cam.width;
  const double dh = 2 * cam.h_max / cam.height;
  EXPECT_NEAR(dtheta, dh, 1e-15);
}

TEST(PixelMapping, CroppedCameraBand) {
  CylCamera cam = CylCamera::full(64, 16);
  cam.theta_start = -kPi / 4;
  cam.theta_span = kPi / 2;
  cam.width = 16;
  EXPECT_FALSE(cam.wraps());
  const CylPixel inside = cyl_to_pix(0.0, 0.0, cam);
  EXPECT_NEAR(inside.i, 7.5, 1e-12);
  EXPECT_TRUE(inside.in_band);
  EXPECT_FALSE(cyl_to_pix(kPi, 0.0, cam).in_band);
}

TEST(Pinhole, Examples) {
  PinholeCamera cam{100, 64, 64, 128, 128};
  const PinholePixel axis = pinhole_project({0, 0, 5}, cam);
  EXPECT_TRUE(axis.in_front);
  EXPECT_DOUBLE_EQ(axis.u, 64);
  EXPECT_DOUBLE_EQ(axis.v, 64);

  PinholeCamera origin{100, 0, 0, 128, 128};
  const PinholePixel side = pinhole_project({1, 0, 2}, origin);
  EXPECT_DOUBLE_EQ(side.u, 50);
  EXPECT_DOUBLE_EQ(side.v, 0);

  EXPECT_FALSE(pinhole_project({0, 0, -1}, cam).in_front);
}

TEST(Pinhole, ProjectUnprojectInverse) {
  const PinholeCamera cam = PinholeCamera::from_fov(100.0, 33, 33);
  EXPECT_DOUBLE_EQ(cam.cx, 16.0);
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-3, 3), z(0.5, 20);
  for (int n = 0; n < 200; ++n) {
    const Point3 p(u(gen), u(gen), z(gen));
    const PinholePixel px = pinhole_project(p, cam);
    EXPECT_LT((pinhole_unproject(px.u, px.v, p.z(), cam) - p).norm(), 1e-12 * p.norm());
  }
}

}  // namespace
}  // namespace cylsfm
