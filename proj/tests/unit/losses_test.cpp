#include <cmath>
#include <random>

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include "cylsfm/core/branch_trace.hpp"
#include "cylsfm/core/error.hpp"
#include "cylsfm/synthesis/depth_state.hpp"
#include "cylsfm/synthesis/losses.hpp"
#include "oracles.hpp"

namespace cylsfm {
namespace {

TEST(PhotometricLoss, Examples) {
  const Tensor valid(4, 6, 1, 1.0);
  const Tensor a = oracle::random_tensor(4, 6, 3, 1, 0, 1);
  EXPECT_EQ(photometric_loss(a, a, nullptr, valid), 0.0);
  EXPECT_DOUBLE_EQ(photometric_loss(Tensor(4, 6, 3, 0.5), Tensor(4, 6, 3, 0.25), nullptr, valid), 0.25);
  const Tensor zero_weights(4, 6, 1, 0.0);
  EXPECT_EQ(photometric_loss(a, oracle::random_tensor(4, 6, 3, 2, 0, 1), &zero_weights, valid), 0.0);
}

TEST(PhotometricLoss, NormalizesByValidPixels) {
  Tensor valid(2, 2, 1, 0.0);
  valid(0, 0) = 1.0;
  Tensor proj(2, 2, 1, 1.0), target(2, 2, 1, 0.0);
  EXPECT_DOUBLE_EQ(photometric_loss(proj, target, nullptr, valid), 1.0);
}

TEST(PhotometricLoss, EmptyMaskThrows) {
  try {
    photometric_loss(Tensor(2, 2, 3), Tensor(2, 2, 3), nullptr, Tensor(2, 2, 1, 0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyMask);
  }
}

TEST(SmoothLoss, ConstantDisparityIsFree) {
  EXPECT_EQ(smooth_loss_second_order(Tensor(6, 8, 1, 0.3), Seam::Wrap), 0.0);
  EXPECT_EQ(smooth_loss_image_aware(Tensor(6, 8, 1, 0.3), Tensor(6, 8, 3, 0.5), Seam::Wrap, 2), 0.0);
}

TEST(SmoothLoss, VerticalRampOnlyPaysAtBorderRows) {
  const int R = 6, C = 8;
  Tensor ramp(R, C, 1);
  for (int r = 0; r < R; ++r)
    for (int c = 0; c < C; ++c) ramp(r, c) = 0.1 * r;
  // Interior rows have zero curvature; the replicated top and bottom rows
  // each contribute |slope| per column.
  EXPECT_NEAR(smooth_loss_second_order(ramp, Seam::Wrap), 2 * 0.1 * C / (R * C), 1e-15);
}

TEST(SmoothLoss, SineMatchesAnalyticCurvature) {
  const int C = 64, R = 4;
  const double k = 2 * M_PI / C;
  Tensor disp(R, C, 1);
  for (int r = 0; r < R; ++r)
    for (int c = 0; c < C; ++c) disp(r, c) = std::sin(k * c);
  // mean |k^2 sin| over a full period is k^2 * 2/pi; cross terms vanish.
  const double analytic = k * k * 2.0 / M_PI;
  EXPECT_NEAR(smooth_loss_second_order(disp, Seam::Wrap), analytic, 0.01 * analytic);
}

TEST(SmoothLoss, ImageAwareWithConstantImageIsUnweighted) {
  const Tensor disp = oracle::random_tensor(5, 8, 1, 3);
  const double expected = [&] {
    double s = 0;
    for (Diff op : {Diff::XX, Diff::XY, Diff::YY}) {
      const Tensor d = finite_diff(disp, op);
      for (double v : d.values()) s += std::abs(v);
    }
    return s / (5 * 8);
  }();
  EXPECT_NEAR(smooth_loss_image_aware(disp, Tensor(5, 8, 3, 0.4), Seam::Wrap, 2), expected, 1e-14);
}

TEST(SmoothLoss, ImageEdgeAttenuatesPenalty) {
  const int R = 6, C = 8;
  Tensor disp(R, C, 1, 0.2), image(R, C, 3, 0.1);
  for (int r = 0; r < R; ++r)
    for (int c = C / 2; c < C; ++c) {
      disp(r, c) = 1.0;
      for (int k = 0; k < 3; ++k) image(r, c, k) = 0.9;
    }
  const double flat = smooth_loss_image_aware(disp, Tensor(R, C, 3, 0.1), Seam::Wrap, 2);
  const double edged = smooth_loss_image_aware(disp, image, Seam::Wrap, 2);
  EXPECT_GT(flat, 0.0);
  EXPECT_LT(edged, flat);
}

TEST(Explainability, SymmetricLogits) {
  Tensor logits(2, 3, 2, 0.7);
  const Tensor w = mask_weights(logits);
  for (double v : w.values()) EXPECT_DOUBLE_EQ(v, 0.5);
  EXPECT_NEAR(explainability_loss(logits), std::log(2.0), 1e-15);
}

TEST(Explainability, SaturatedLogitExplainsEverything) {
  Tensor logits(1, 1, 2);
  logits(0, 0, 0) = 800.0;
  EXPECT_DOUBLE_EQ(mask_weights(logits)(0, 0), 1.0);
  EXPECT_EQ(explainability_loss(logits), 0.0);
}

TEST(Explainability, HandEvaluatedLogits) {
  Tensor logits(1, 1, 2);
  logits(0, 0, 0) = 2.0;
  EXPECT_NEAR(mask_weights(logits)(0, 0), 0.8807970779778823, 1e-15);
  EXPECT_NEAR(explainability_loss(logits), 0.1269280110429725, 1e-15);
}

TEST(DepthState, BoundedDisparity) {
  DepthState s{oracle::random_tensor(3, 4, 1, 1, -30, 30), DepthBounds{}};
  const Tensor depth = s.depth();
  for (double d : depth.values()) {
    EXPECT_GE(d, 0.1);
    EXPECT_LE(d, 100.0);
  }
  DepthState mid{Tensor(1, 1, 1, 0.0), DepthBounds{}};
  EXPECT_DOUBLE_EQ(mid.disparity()(0, 0), 0.5 * (0.01 + 10.0));
}

struct Snippet3 {
  CylCamera cam = CylCamera::full(16, 8);
  Tensor target;
  std::vector<Tensor> sources;
  std::vector<Tensor> disparity;
  std::vector<Pose6> poses;
  std::vector<std::vector<Tensor>> masks;
};

Snippet3 random_snippet(unsigned seed, int scales) {
  Snippet3 s;
  s.target = oracle::random_tensor(8, 16, 3, seed, 0, 1);
  s.sources = {oracle::random_tensor(8, 16, 3, seed + 1, 0, 1), oracle::random_tensor(8, 16, 3, seed + 2, 0, 1)};
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  for (int k = 0; k < 2; ++k) {
    Pose6 p;
    for (int j = 0; j < 6; ++j) p[j] = u(gen);
    s.poses.push_back(p);
    std::vector<Tensor> m;
    for (int l = 0; l < scales; ++l)
      m.push_back(oracle::random_tensor(8 >> l, 16 >> l, 2, seed + 30 + static_cast<unsigned>(10 * k + l)));
    s.masks.push_back(m);
  }
  for (int l = 0; l < scales; ++l)
    s.disparity.push_back(oracle::random_tensor(8 >> l, 16 >> l, 1, seed + 50 + static_cast<unsigned>(l), 0.15, 0.5));
  return s;
}

LossInputs inputs_of(const Snippet3& s) {
  return {&s.target, s.sources, s.cam, s.disparity, s.poses, s.masks};
}

TEST(TotalLoss, StaticSnippetIsFree) {
  Snippet3 s = random_snippet(1, 2);
  s.sources = {s.target, s.target};
  s.poses = {Pose6{}, Pose6{}};
  LossConfig cfg;
  cfg.lambda_s = 0;
  cfg.lambda_e = 0;
  cfg.num_scales = 2;
  EXPECT_NEAR(total_loss(inputs_of(s), cfg).total, 0.0, 1e-12);
}

TEST(TotalLoss, BreakdownAddsUp) {
  const Snippet3 s = random_snippet(2, 2);
  LossConfig cfg;
  cfg.lambda_e = 0.3;
  cfg.num_scales = 2;
  const LossBreakdown b = total_loss(inputs_of(s), cfg);
  EXPECT_GT(b.pixel, 0);
  EXPECT_GT(b.smooth, 0);
  EXPECT_GT(b.exp, 0);
  EXPECT_DOUBLE_EQ(b.total, b.pixel + b.smooth + b.exp);
}

TEST(TotalLoss, PyramidDepthMismatchThrows) {
  const Snippet3 s = random_snippet(3, 2);
  LossConfig cfg;
  cfg.num_scales = 3;
  EXPECT_THROW(total_loss(inputs_of(s), cfg), Error);
}

// Shifting every map by `shift` columns is a world rotation by delta about
// y, which also rotates the translations.
double shifted_loss(const Snippet3& s, int shift, const LossConfig& cfg) {
  Snippet3 t = s;
  const double delta = kTwoPi * shift / s.cam.width;
  for (auto& p : t.poses) p.t = Eigen::AngleAxisd(delta, Eigen::Vector3d::UnitY()) * p.t;
  t.target = s.target.roll_cols(shift);
  for (auto& src : t.sources) src = src.roll_cols(shift);
  for (int l = 0; l < cfg.num_scales; ++l) t.disparity[l] = s.disparity[l].roll_cols(shift >> l);
  for (auto& m : t.masks)
    for (int l = 0; l < cfg.num_scales; ++l) m[l] = m[l].roll_cols(shift >> l);
  return total_loss(inputs_of(t), cfg).total;
}

TEST(TotalLoss, SeamShiftInvariantOnlyWithWrap) {
  // Yaw-only rotations commute with the world rotation.
  Snippet3 s = random_snippet(4, 2);
  for (auto& p : s.poses) {
    p.r = Eigen::Vector3d(0, p.r.y(), 0);
  }
  LossConfig cfg;
  cfg.num_scales = 2;
  cfg.lambda_e = 0.1;
  const double base = total_loss(inputs_of(s), cfg).total;
  for (int shift : {2, 6, 10}) EXPECT_NEAR(shifted_loss(s, shift, cfg), base, 1e-10) << shift;

  cfg.wrap = false;
  const double open = total_loss(inputs_of(s), cfg).total;
  EXPECT_GT(std::abs(shifted_loss(s, 6, cfg) - open), 1e-6);
}

TEST(TotalLoss, PerturbingTrueDepthRaisesPixelTerm) {
  const CylCamera cam = CylCamera::full(64, 16);
  const Eigen::Vector3d target_at(0.7, 0.0, -0.4);
  const Eigen::Vector3d step(0.1, 0.0, 0.05);
  const oracle::AnalyticView tgt = oracle::render_cylinder(cam, target_at, 5.0);
  const std::vector<Tensor> sources{oracle::render_cylinder(cam, target_at - step, 5.0).image,
                                    oracle::render_cylinder(cam, target_at + step, 5.0).image};
  // Axis-aligned cameras: X_source = X_target + (target - source).
  std::vector<Pose6> poses(2);
  poses[0].t = step;
  poses[1].t = -step;
  LossConfig cfg;
  cfg.num_scales = 1;
  cfg.lambda_s = 0;
  auto pixel_term = [&](const Tensor& disparity) {
    const std::vector<Tensor> pyr{disparity};
    return total_loss({&tgt.image, sources, cam, pyr, poses, {}}, cfg).pixel;
  };
  Tensor disparity = tgt.depth;
  for (double& v : disparity.values()) v = 1.0 / v;
  const double truth = pixel_term(disparity);
  EXPECT_LT(truth, 1e-3);
  std::mt19937_64 gen(99);
  std::normal_distribution<double> noise(0.0, 0.3);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor perturbed = disparity;
    for (double& v : perturbed.values()) v *= std::exp(noise(gen));
    EXPECT_GT(pixel_term(perturbed), truth) << trial;
  }
}

class TotalLossGradient : public ::testing::TestWithParam<SmoothMode> {};

TEST_P(TotalLossGradient, MatchesFiniteDifferences) {
  LossConfig cfg;
  cfg.lambda_e = 0.2;
  cfg.num_scales = 2;
  cfg.smooth_mode = GetParam();
  int probes = 0, skipped = 0;
  for (unsigned trial = 0; trial < 3; ++trial) {
    Snippet3 s = random_snippet(10 * trial, 2);
    LossGradients g;
    total_loss(inputs_of(s), cfg, &g);
    const double h = 1e-5;
    auto probe = [&](double analytic, double& param) {
      const double x0 = param;
      std::uint64_t hp = 0, hm = 0;
      double fp = 0, fm = 0;
      {
        param = x0 + h;
        branch_trace::Scope scope;
        fp = total_loss(inputs_of(s), cfg).total;
        hp = scope.hash();
      }
      {
        param = x0 - h;
        branch_trace::Scope scope;
        fm = total_loss(inputs_of(s), cfg).total;
        hm = scope.hash();
      }
      param = x0;
      if (hp != hm) {
        ++skipped;
        return;
      }
      ++probes;
      EXPECT_LT(oracle::relative_error(analytic, (fp - fm) / (2 * h)), 1e-4);
    };
    for (std::size_t k = 0; k < 2; ++k)
      for (int j = 0; j < 6; ++j) probe(g.poses[k][j], s.poses[k][j]);
    for (std::size_t l = 0; l < 2; ++l)
      for (std::size_t i = 0; i < s.disparity[l].size(); i += 3)
        probe(g.disparity[l].values()[i], s.disparity[l].values()[i]);
    for (std::size_t i = 0; i < s.masks[1][0].size(); i += 5)
      probe(g.mask_logits[1][0].values()[i], s.masks[1][0].values()[i]);
  }
  EXPECT_GT(probes, 10 * skipped);
}

INSTANTIATE_TEST_SUITE_P(AllModes, TotalLossGradient,
                         ::testing::Values(SmoothMode::SecondOrder, SmoothMode::ImageAware,
                                           SmoothMode::ImageAwareFirstOrder));

}  // namespace
}  // namespace cylsfm
