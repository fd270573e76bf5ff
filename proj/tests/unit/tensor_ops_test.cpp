#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cylsfm/core/error.hpp"
#include "cylsfm/tensor/wrap_ops.hpp"
#include "oracles.hpp"

namespace cylsfm {
namespace {

Tensor row(std::initializer_list<double> v) {
  Tensor t(1, static_cast<int>(v.size()), 1);
  int c = 0;
  for (double x : v) t(0, c++) = x;
  return t;
}

Kernel random_kernel(int kh, int kw, int cin, int cout, unsigned seed) {
  Kernel k(kh, kw, cin, cout);
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  for (double& w : k.weights) w = u(gen);
  for (double& b : k.bias) b = u(gen);
  return k;
}

double dot(const Tensor& a, const Tensor& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.values()[i] * b.values()[i];
  return s;
}

TEST(WrapPad, CopiesOppositeColumns) {
  const Tensor p = wrap_pad(row({1, 2, 3}), 1);
  EXPECT_EQ(p, row({3, 1, 2, 3, 1}));
  EXPECT_EQ(wrap_pad(row({1, 2, 3, 4}), 2), row({3, 4, 1, 2, 3, 4, 1, 2}));
  const Tensor t = oracle::random_tensor(3, 5, 2, 1);
  EXPECT_EQ(wrap_pad(t, 0), t);
}

TEST(WrapPad, RejectsPadWiderThanTensor) {
  try {
    wrap_pad(row({1, 2}), 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BadPad);
  }
}

TEST(Conv2d, WrappedWindowSumsWholeRow) {
  Kernel k(1, 3, 1, 1);
  k.weights = {1, 1, 1};
  EXPECT_EQ(conv2d(row({1, 2, 3}), k, 1), row({6, 6, 6}));
}

TEST(Conv2d, IdentityKernel) {
  Kernel k(1, 1, 2, 2);
  k.at(0, 0, 0, 0) = 1;
  k.at(0, 0, 1, 1) = 1;
  const Tensor t = oracle::random_tensor(4, 6, 2, 3);
  EXPECT_EQ(conv2d(t, k, 1), t);
}

TEST(Conv2d, ChannelMismatchThrows) {
  Kernel k(3, 3, 3, 1);
  try {
    conv2d(Tensor(4, 4, 2), k, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
  }
}

TEST(Conv2d, MatchesBruteForceOracle) {
  for (unsigned seed = 0; seed < 10; ++seed)
    for (int stride : {1, 2})
      for (Seam seam : {Seam::Wrap, Seam::Open}) {
        const Tensor in = oracle::random_tensor(6, 8, 2, seed);
        const Kernel k = random_kernel(seed % 2 ? 3 : 5, 3, 2, 3, seed + 100);
        const Tensor fast = conv2d(in, k, stride, seam);
        const Tensor slow = oracle::brute_force_conv(in, k, stride, seam == Seam::Wrap);
        ASSERT_TRUE(fast.same_shape(slow));
        for (std::size_t i = 0; i < fast.size(); ++i)
          ASSERT_NEAR(fast.values()[i], slow.values()[i], 1e-10);
      }
}

TEST(Conv2d, CircularShiftEquivariance) {
  for (unsigned seed = 0; seed < 5; ++seed) {
    const Tensor in = oracle::random_tensor(5, 8, 2, seed);
    const Kernel k = random_kernel(3, 3, 2, 2, seed + 7);
    for (int s = 1; s < 8; ++s) {
      const Tensor a = conv2d(in.roll_cols(s), k, 1);
      const Tensor b = oracle::brute_force_conv(in, k, 1, true).roll_cols(s);
      for (std::size_t i = 0; i < a.size(); ++i) ASSERT_NEAR(a.values()[i], b.values()[i], 1e-12);
    }
  }
}

TEST(Conv2d, StrideTwoShiftsByHalf) {
  const Tensor in = oracle::random_tensor(4, 8, 1, 4);
  const Kernel k = random_kernel(3, 3, 1, 1, 5);
  const Tensor a = conv2d(in.roll_cols(4), k, 2);
  const Tensor b = conv2d(in, k, 2).roll_cols(2);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.values()[i], b.values()[i], 1e-12);
}

TEST(Conv2d, BackwardMatchesFiniteDifferences) {
  for (unsigned seed = 0; seed < 4; ++seed)
    for (int stride : {1, 2})
      for (Seam seam : {Seam::Wrap, Seam::Open}) {
        const Tensor in = oracle::random_tensor(6, 8, 2, seed);
        const Kernel k = random_kernel(3, 3, 2, 2, seed + 1);
        const Tensor w = oracle::random_tensor(6 / stride, 8 / stride, 2, seed + 2);
        const ConvGrads g = conv2d_backward(in, k, stride, seam, w);

        std::vector<double> x(in.values().begin(), in.values().end());
        const auto num_in = oracle::numeric_gradient(
            [&](const std::vector<double>& v) {
              Tensor t = in;
              std::copy(v.begin(), v.end(), t.values().begin());
              return dot(conv2d(t, k, stride, seam), w);
            },
            x);
        for (std::size_t i = 0; i < x.size(); ++i)
          ASSERT_LT(oracle::relative_error(g.input.values()[i], num_in[i]), 1e-4);

        const auto num_w = oracle::numeric_gradient(
            [&](const std::vector<double>& v) {
              Kernel kk = k;
              kk.weights = v;
              return dot(conv2d(in, kk, stride, seam), w);
            },
            k.weights);
        for (std::size_t i = 0; i < num_w.size(); ++i)
          ASSERT_LT(oracle::relative_error(g.kernel.weights[i], num_w[i]), 1e-4);
        const auto num_b = oracle::numeric_gradient(
            [&](const std::vector<double>& v) {
              Kernel kk = k;
              kk.bias = v;
              return dot(conv2d(in, kk, stride, seam), w);
            },
            k.bias);
        for (std::size_t i = 0; i < num_b.size(); ++i)
          ASSERT_LT(oracle::relative_error(g.kernel.bias[i], num_b[i]), 1e-4);
      }
}

Tensor identity_grid(int rows, int cols) {
  Tensor g(rows, cols, 2);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      g(r, c, 0) = c;
      g(r, c, 1) = r;
    }
  return g;
}

TEST(BilinearSample, IdentityGridReproducesImage) {
  const Tensor img = oracle::random_tensor(5, 7, 3, 2);
  const SampleResult s = bilinear_sample(img, identity_grid(5, 7));
  EXPECT_EQ(s.samples, img);
  for (double v : s.valid.values()) EXPECT_EQ(v, 1.0);
}

TEST(BilinearSample, SeamInterpolation) {
  const Tensor img = row({10, 0, 0, 2});
  Tensor coords(1, 1, 2);
  coords(0, 0, 0) = 3.5;
  coords(0, 0, 1) = 0;
  EXPECT_DOUBLE_EQ(bilinear_sample(img, coords).samples(0, 0), 6.0);
  coords(0, 0, 0) = -0.5;
  EXPECT_DOUBLE_EQ(bilinear_sample(img, coords).samples(0, 0), 6.0);
  coords(0, 0, 0) = 3.5 + 4 * 7;
  EXPECT_DOUBLE_EQ(bilinear_sample(img, coords).samples(0, 0), 6.0);
}

TEST(BilinearSample, OutOfVerticalBoundsIsInvalid) {
  const Tensor img = oracle::random_tensor(4, 4, 2, 8);
  Tensor coords(1, 2, 2);
  coords(0, 0, 0) = 1;
  coords(0, 0, 1) = -5;
  coords(0, 1, 0) = 1;
  coords(0, 1, 1) = 3.4;  // inside the outer half pixel: clamped to the last row
  const SampleResult s = bilinear_sample(img, coords);
  EXPECT_EQ(s.valid(0, 0), 0.0);
  EXPECT_EQ(s.samples(0, 0, 0), 0.0);
  EXPECT_EQ(s.samples(0, 0, 1), 0.0);
  EXPECT_EQ(s.valid(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(s.samples(0, 1, 1), img(3, 1, 1));
}

TEST(BilinearSample, OpenSeamInvalidatesPastEdge) {
  const Tensor img = row({1, 2, 3, 4});
  Tensor coords(1, 3, 2);
  coords(0, 0, 0) = -0.6;
  coords(0, 1, 0) = 3.5;
  coords(0, 2, 0) = -0.25;
  const SampleResult s = bilinear_sample(img, coords, Seam::Open);
  EXPECT_EQ(s.valid(0, 0), 0.0);
  EXPECT_EQ(s.valid(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(s.samples(0, 1), 4.0);
  EXPECT_DOUBLE_EQ(s.samples(0, 2), 1.0);
}

TEST(BilinearSample, BackwardMatchesFiniteDifferences) {
  std::mt19937 gen(21);
  std::uniform_real_distribution<double> frac(0.01, 0.99);
  std::uniform_int_distribution<int> col(-3, 12), rowi(0, 3);
  for (int trial = 0; trial < 10; ++trial) {
    const Tensor img = oracle::random_tensor(5, 8, 2, static_cast<unsigned>(trial));
    Tensor coords(3, 4, 2);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 4; ++c) {
        coords(r, c, 0) = col(gen) + frac(gen);
        coords(r, c, 1) = rowi(gen) + frac(gen);
      }
    const Tensor w = oracle::random_tensor(3, 4, 2, 99 + static_cast<unsigned>(trial));
    const SampleGrads g = bilinear_sample_backward(img, coords, Seam::Wrap, w);

    std::vector<double> c0(coords.values().begin(), coords.values().end());
    const auto num_c = oracle::numeric_gradient(
        [&](const std::vector<double>& v) {
          Tensor cc = coords;
          std::copy(v.begin(), v.end(), cc.values().begin());
          return dot(bilinear_sample(img, cc).samples, w);
        },
        c0);
    for (std::size_t i = 0; i < c0.size(); ++i) ASSERT_LT(oracle::relative_error(g.coords.values()[i], num_c[i]), 1e-4);

    std::vector<double> i0(img.values().begin(), img.values().end());
    const auto num_i = oracle::numeric_gradient(
        [&](const std::vector<double>& v) {
          Tensor im = img;
          std::copy(v.begin(), v.end(), im.values().begin());
          return dot(bilinear_sample(im, coords).samples, w);
        },
        i0);
    for (std::size_t i = 0; i < i0.size(); ++i) ASSERT_LT(oracle::relative_error(g.image.values()[i], num_i[i]), 1e-4);
  }
}

TEST(BilinearSample, ShiftEquivariance) {
  const Tensor img = oracle::random_tensor(4, 8, 1, 3);
  Tensor coords = oracle::random_tensor(3, 8, 2, 4, 0.0, 3.0);
  const Tensor base = bilinear_sample(img, coords).samples;
  for (int s = 1; s < 8; ++s) {
    Tensor shifted = coords;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 8; ++c) shifted(r, c, 0) += s;
    const Tensor a = bilinear_sample(img.roll_cols(s), shifted).samples;
    for (std::size_t i = 0; i < a.size(); ++i) ASSERT_NEAR(a.values()[i], base.values()[i], 1e-12);
    const Tensor b = bilinear_sample(img, coords.roll_cols(s)).samples;
    EXPECT_EQ(b, base.roll_cols(s));
  }
}

TEST(Resample, ConstantSurvivesBothScales) {
  const Tensor t(4, 6, 2, 0.37);
  const Tensor down = downsample_half(t);
  for (double v : down.values()) EXPECT_DOUBLE_EQ(v, 0.37);
  const Tensor up = upsample_double(t);
  for (double v : up.values()) EXPECT_NEAR(v, 0.37, 1e-15);
  const Tensor back = downsample_half(up);
  for (double v : back.values()) EXPECT_NEAR(v, 0.37, 1e-15);
}

TEST(Resample, MeanPoolBlock) {
  Tensor t(2, 2, 1);
  t(0, 0) = 1;
  t(0, 1) = 3;
  t(1, 0) = 5;
  t(1, 1) = 7;
  EXPECT_DOUBLE_EQ(downsample_half(t)(0, 0), 4.0);
  try {
    downsample_half(Tensor(3, 2, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
  }
}

TEST(Resample, UpsampleWrapsAcrossSeam) {
  const double a = 2.0, b = 10.0;
  const Tensor up = upsample_double(row({a, b}));
  ASSERT_EQ(up.cols(), 4);
  EXPECT_DOUBLE_EQ(up(0, 0), 0.75 * a + 0.25 * b);
  EXPECT_DOUBLE_EQ(up(0, 1), 0.75 * a + 0.25 * b);
  EXPECT_DOUBLE_EQ(up(0, 2), 0.25 * a + 0.75 * b);
  EXPECT_DOUBLE_EQ(up(0, 3), 0.25 * a + 0.75 * b);
  const Tensor open = upsample_double(row({a, b}), Seam::Open);
  EXPECT_DOUBLE_EQ(open(0, 0), a);
  EXPECT_DOUBLE_EQ(open(0, 3), b);
}

TEST(Resample, BackwardIsAdjoint) {
  for (Seam seam : {Seam::Wrap, Seam::Open}) {
    const Tensor x = oracle::random_tensor(3, 5, 2, 1);
    const Tensor y = oracle::random_tensor(6, 10, 2, 2);
    EXPECT_NEAR(dot(upsample_double(x, seam), y), dot(x, upsample_double_backward(y, seam)), 1e-12);
  }
  const Tensor x = oracle::random_tensor(6, 10, 2, 3);
  const Tensor y = oracle::random_tensor(3, 5, 2, 4);
  EXPECT_NEAR(dot(downsample_half(x), y), dot(x, downsample_half_backward(y)), 1e-12);
}

TEST(Resample, ShiftEquivariance) {
  const Tensor t = oracle::random_tensor(4, 8, 1, 6);
  EXPECT_EQ(upsample_double(t.roll_cols(3)), upsample_double(t).roll_cols(6));
  EXPECT_EQ(downsample_half(t.roll_cols(4)), downsample_half(t).roll_cols(2));
}

TEST(FiniteDiff, ConstantHasNoDifferences) {
  const Tensor t(5, 6, 2, 1.5);
  for (Diff op : {Diff::X, Diff::Y, Diff::XX, Diff::YY, Diff::XY}) {
    const Tensor d = finite_diff(t, op);
    for (double v : d.values()) EXPECT_EQ(v, 0.0);
  }
}

TEST(FiniteDiff, SecondDifferenceOfSine) {
  const int C = 64;
  Tensor t(1, C, 1);
  const double k = 2 * M_PI / C;
  for (int c = 0; c < C; ++c) t(0, c) = std::sin(k * c);
  const Tensor d = dxx(t);
  for (int c = 0; c < C; ++c) EXPECT_LT(std::abs(d(0, c) + k * k * std::sin(k * c)), k * k * 1e-2);
}

TEST(FiniteDiff, RampHasNoCurvatureInside) {
  Tensor t(6, 3, 1);
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 3; ++c) t(r, c) = r;
  const Tensor d = dyy(t);
  for (int r = 1; r < 5; ++r)
    for (int c = 0; c < 3; ++c) EXPECT_EQ(d(r, c), 0.0);
  // One-sided replication at the borders.
  EXPECT_EQ(d(0, 0), 1.0);
  EXPECT_EQ(d(5, 0), -1.0);
}

TEST(FiniteDiff, LinearAndAdjoint) {
  const Tensor t = oracle::random_tensor(4, 6, 2, 13);
  const Tensor g = oracle::random_tensor(4, 6, 2, 14);
  for (Seam seam : {Seam::Wrap, Seam::Open})
    for (Diff op : {Diff::X, Diff::Y, Diff::XX, Diff::YY, Diff::XY}) {
      Tensor scaled = t;
      scaled *= 2.5;
      const Tensor a = finite_diff(scaled, op, seam);
      Tensor b = finite_diff(t, op, seam);
      b *= 2.5;
      for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.values()[i], b.values()[i], 1e-12);
      EXPECT_NEAR(dot(finite_diff(t, op, seam), g), dot(t, finite_diff_adjoint(g, op, seam)), 1e-12);
    }
}

TEST(FiniteDiff, ShiftEquivariance) {
  const Tensor t = oracle::random_tensor(4, 7, 1, 15);
  for (Diff op : {Diff::X, Diff::Y, Diff::XX, Diff::YY, Diff::XY})
    for (int s = 1; s < 7; ++s) EXPECT_EQ(finite_diff(t.roll_cols(s), op), finite_diff(t, op).roll_cols(s));
}

}  // namespace
}  // namespace cylsfm
