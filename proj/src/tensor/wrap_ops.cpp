#include "cylsfm/tensor/wrap_ops.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include "cylsfm/core/branch_trace.hpp"
#include "cylsfm/core/error.hpp"
#include "cylsfm/core/parallel.hpp"

namespace cylsfm {

namespace {

int wrap_index(long long i, int n) noexcept {
  const long long m = i % n;
  return static_cast<int>(m < 0 ? m + n : m);
}

void check_conv_shapes(const Tensor& input, const Kernel& kern, int stride) {
  require(input.channels() == kern.in_channels, ErrorCode::ShapeMismatch,
          "conv input channels do not match kernel");
  require(stride == 1 || stride == 2, ErrorCode::BadArgument, "conv stride must be 1 or 2");
  require(input.rows() % stride == 0 && input.cols() % stride == 0, ErrorCode::ShapeMismatch,
          "conv input size not divisible by stride");
}

// Source column for each (output column, kernel column); -1 marks padding.
std::vector<int> conv_column_table(int cols, int out_cols, int k_w, int stride, Seam seam) {
  const int pw = (k_w - 1) / 2;
  std::vector<int> table(static_cast<std::size_t>(out_cols) * k_w);
  for (int c = 0; c < out_cols; ++c)
    for (int kx = 0; kx < k_w; ++kx) {
      const int x = stride * c + kx - pw;
      int src = x;
      if (seam == Seam::Wrap)
        src = wrap_index(x, cols);
      else if (x < 0 || x >= cols)
        src = -1;
      table[static_cast<std::size_t>(c) * k_w + kx] = src;
    }
  return table;
}

// One axis of a bilinear lookup.
struct AxisTap {
  bool valid = false;
  bool clamped = false;
  int i0 = 0;
  int i1 = 0;
  double frac = 0.0;
};

AxisTap resolve_axis(double coord, int n, bool wrap) noexcept {
  AxisTap t;
  if (wrap) {
    const double fl = std::floor(coord);
    t.valid = true;
    t.frac = coord - fl;
    const auto base = static_cast<long long>(fl);
    t.i0 = wrap_index(base, n);
    t.i1 = wrap_index(base + 1, n);
    return t;
  }
  if (coord < -0.5 || coord > n - 0.5) return t;
  t.valid = true;
  const double cc = std::clamp(coord, 0.0, static_cast<double>(n - 1));
  t.clamped = cc != coord;
  t.i0 = std::min(static_cast<int>(std::floor(cc)), n - 1);
  t.frac = cc - t.i0;
  t.i1 = std::min(t.i0 + 1, n - 1);
  return t;
}

void trace_taps(const AxisTap& x, const AxisTap& y) {
  branch_trace::note((static_cast<std::uint64_t>(x.valid) << 1) | static_cast<std::uint64_t>(y.valid));
  branch_trace::note(static_cast<std::uint64_t>(x.i0) * 2 + static_cast<std::uint64_t>(x.clamped));
  branch_trace::note(static_cast<std::uint64_t>(y.i0) * 2 + static_cast<std::uint64_t>(y.clamped));
}

struct Tap {
  int dr;
  int dc;
  double w;
};

struct Stencil {
  std::array<Tap, 4> taps;
  int count;
};

Stencil stencil_for(Diff op) noexcept {
  switch (op) {
    case Diff::X: return {{{{0, 1, 1.0}, {0, 0, -1.0}}}, 2};
    case Diff::Y: return {{{{1, 0, 1.0}, {0, 0, -1.0}}}, 2};
    case Diff::XX: return {{{{0, 1, 1.0}, {0, 0, -2.0}, {0, -1, 1.0}}}, 3};
    case Diff::YY: return {{{{1, 0, 1.0}, {0, 0, -2.0}, {-1, 0, 1.0}}}, 3};
    case Diff::XY: return {{{{1, 1, 1.0}, {1, 0, -1.0}, {0, 1, -1.0}, {0, 0, 1.0}}}, 4};
  }
  return {{}, 0};
}

template <typename Visit>
void for_each_stencil_tap(int rows, int cols, Diff op, Seam seam, Visit&& visit) {
  const Stencil st = stencil_for(op);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      for (int t = 0; t < st.count; ++t) {
        const Tap& tap = st.taps[static_cast<std::size_t>(t)];
        const int rr = std::clamp(r + tap.dr, 0, rows - 1);
        const int cc = seam == Seam::Wrap ? wrap_index(c + tap.dc, cols) : std::clamp(c + tap.dc, 0, cols - 1);
        visit(r, c, rr, cc, tap.w);
      }
}

}  // namespace

Tensor wrap_pad(const Tensor& t, int k) {
  require(k >= 0 && k <= t.cols(), ErrorCode::BadPad, "pad width exceeds tensor width");
  const int cols = t.cols();
  Tensor out(t.rows(), cols + 2 * k, t.channels());
  for (int r = 0; r < t.rows(); ++r)
    for (int c = 0; c < cols + 2 * k; ++c) {
      const int src = wrap_index(c - k, cols == 0 ? 1 : cols);
      for (int ch = 0; ch < t.channels(); ++ch) out(r, c, ch) = t(r, src, ch);
    }
  return out;
}

Tensor conv2d(const Tensor& input, const Kernel& kern, int stride, Seam seam) {
  check_conv_shapes(input, kern, stride);
  const int rows = input.rows();
  const int out_rows = rows / stride;
  const int out_cols = input.cols() / stride;
  const int ph = (kern.k_h - 1) / 2;
  const int cin = kern.in_channels;
  const int cout = kern.out_channels;
  const std::vector<int> cols = conv_column_table(input.cols(), out_cols, kern.k_w, stride, seam);

  Tensor out(out_rows, out_cols, cout);
  parallel_for(static_cast<std::size_t>(out_rows), [&](std::size_t ri) {
    const int r = static_cast<int>(ri);
    for (int c = 0; c < out_cols; ++c) {
      double* o = out.ptr(r, c, 0);
      std::copy(kern.bias.begin(), kern.bias.end(), o);
      for (int ky = 0; ky < kern.k_h; ++ky) {
        const int y = stride * r + ky - ph;
        if (y < 0 || y >= rows) continue;
        for (int kx = 0; kx < kern.k_w; ++kx) {
          const int x = cols[static_cast<std::size_t>(c) * kern.k_w + kx];
          if (x < 0) continue;
          const double* ip = input.ptr(y, x, 0);
          const double* wp = kern.ptr(ky, kx);
          for (int ci = 0; ci < cin; ++ci) {
            const double v = ip[ci];
            const double* wrow = wp + static_cast<std::size_t>(ci) * cout;
            for (int co = 0; co < cout; ++co) o[co] += v * wrow[co];
          }
        }
      }
    }
  });
  return out;
}

ConvGrads conv2d_backward(const Tensor& input, const Kernel& kern, int stride, Seam seam,
                          const Tensor& grad_out) {
  check_conv_shapes(input, kern, stride);
  const int rows = input.rows();
  const int out_rows = rows / stride;
  const int out_cols = input.cols() / stride;
  require(grad_out.rows() == out_rows && grad_out.cols() == out_cols &&
              grad_out.channels() == kern.out_channels,
          ErrorCode::ShapeMismatch, "conv upstream gradient has the wrong shape");
  const int ph = (kern.k_h - 1) / 2;
  const int cin = kern.in_channels;
  const int cout = kern.out_channels;
  const std::vector<int> cols = conv_column_table(input.cols(), out_cols, kern.k_w, stride, seam);

  ConvGrads g{Tensor(input.rows(), input.cols(), cin), Kernel(kern.k_h, kern.k_w, cin, cout)};
  for (int r = 0; r < out_rows; ++r)
    for (int c = 0; c < out_cols; ++c) {
      const double* go = grad_out.ptr(r, c, 0);
      for (int co = 0; co < cout; ++co) g.kernel.bias[static_cast<std::size_t>(co)] += go[co];
      for (int ky = 0; ky < kern.k_h; ++ky) {
        const int y = stride * r + ky - ph;
        if (y < 0 || y >= rows) continue;
        for (int kx = 0; kx < kern.k_w; ++kx) {
          const int x = cols[static_cast<std::size_t>(c) * kern.k_w + kx];
          if (x < 0) continue;
          const double* ip = input.ptr(y, x, 0);
          double* gi = g.input.ptr(y, x, 0);
          const double* wp = kern.ptr(ky, kx);
          double* gw = g.kernel.ptr(ky, kx);
          for (int ci = 0; ci < cin; ++ci) {
            const double v = ip[ci];
            const std::size_t base = static_cast<std::size_t>(ci) * cout;
            double acc = 0.0;
            for (int co = 0; co < cout; ++co) {
              acc += wp[base + co] * go[co];
              gw[base + co] += v * go[co];
            }
            gi[ci] += acc;
          }
        }
      }
    }
  return g;
}

SampleResult bilinear_sample(const Tensor& image, const Tensor& coords, Seam seam) {
  require(coords.channels() == 2, ErrorCode::ShapeMismatch, "sample coordinates need two channels");
  require(image.rows() > 0 && image.cols() > 0, ErrorCode::ShapeMismatch, "cannot sample an empty image");
  const int ch = image.channels();
  SampleResult res{Tensor(coords.rows(), coords.cols(), ch), Tensor(coords.rows(), coords.cols(), 1)};
  for (int r = 0; r < coords.rows(); ++r)
    for (int c = 0; c < coords.cols(); ++c) {
      const AxisTap x = resolve_axis(coords(r, c, 0), image.cols(), seam == Seam::Wrap);
      const AxisTap y = resolve_axis(coords(r, c, 1), image.rows(), false);
      trace_taps(x, y);
      if (!x.valid || !y.valid) continue;
      res.valid(r, c) = 1.0;
      const double w00 = (1.0 - y.frac) * (1.0 - x.frac);
      const double w01 = (1.0 - y.frac) * x.frac;
      const double w10 = y.frac * (1.0 - x.frac);
      const double w11 = y.frac * x.frac;
      const double* p00 = image.ptr(y.i0, x.i0, 0);
      const double* p01 = image.ptr(y.i0, x.i1, 0);
      const double* p10 = image.ptr(y.i1, x.i0, 0);
      const double* p11 = image.ptr(y.i1, x.i1, 0);
      double* o = res.samples.ptr(r, c, 0);
      for (int k = 0; k < ch; ++k) o[k] = w00 * p00[k] + w01 * p01[k] + w10 * p10[k] + w11 * p11[k];
    }
  return res;
}

SampleGrads bilinear_sample_backward(const Tensor& image, const Tensor& coords, Seam seam,
                                     const Tensor& grad_samples) {
  require(coords.channels() == 2, ErrorCode::ShapeMismatch, "sample coordinates need two channels");
  require(grad_samples.rows() == coords.rows() && grad_samples.cols() == coords.cols() &&
              grad_samples.channels() == image.channels(),
          ErrorCode::ShapeMismatch, "sampler upstream gradient has the wrong shape");
  const int ch = image.channels();
  SampleGrads g{Tensor(image.rows(), image.cols(), ch), Tensor(coords.rows(), coords.cols(), 2)};
  for (int r = 0; r < coords.rows(); ++r)
    for (int c = 0; c < coords.cols(); ++c) {
      const AxisTap x = resolve_axis(coords(r, c, 0), image.cols(), seam == Seam::Wrap);
      const AxisTap y = resolve_axis(coords(r, c, 1), image.rows(), false);
      if (!x.valid || !y.valid) continue;
      const double* gs = grad_samples.ptr(r, c, 0);
      const double w00 = (1.0 - y.frac) * (1.0 - x.frac);
      const double w01 = (1.0 - y.frac) * x.frac;
      const double w10 = y.frac * (1.0 - x.frac);
      const double w11 = y.frac * x.frac;
      const double* p00 = image.ptr(y.i0, x.i0, 0);
      const double* p01 = image.ptr(y.i0, x.i1, 0);
      const double* p10 = image.ptr(y.i1, x.i0, 0);
      const double* p11 = image.ptr(y.i1, x.i1, 0);
      double* g00 = g.image.ptr(y.i0, x.i0, 0);
      double* g01 = g.image.ptr(y.i0, x.i1, 0);
      double* g10 = g.image.ptr(y.i1, x.i0, 0);
      double* g11 = g.image.ptr(y.i1, x.i1, 0);
      double di = 0.0;
      double dj = 0.0;
      for (int k = 0; k < ch; ++k) {
        g00[k] += w00 * gs[k];
        g01[k] += w01 * gs[k];
        g10[k] += w10 * gs[k];
        g11[k] += w11 * gs[k];
        di += gs[k] * ((1.0 - y.frac) * (p01[k] - p00[k]) + y.frac * (p11[k] - p10[k]));
        dj += gs[k] * ((1.0 - x.frac) * (p10[k] - p00[k]) + x.frac * (p11[k] - p01[k]));
      }
      g.coords(r, c, 0) = x.clamped ? 0.0 : di;
      g.coords(r, c, 1) = y.clamped ? 0.0 : dj;
    }
  return g;
}

Tensor downsample_half(const Tensor& t) {
  require(t.rows() % 2 == 0 && t.cols() % 2 == 0, ErrorCode::ShapeMismatch,
          "downsample_half needs even dimensions");
  Tensor out(t.rows() / 2, t.cols() / 2, t.channels());
  for (int r = 0; r < out.rows(); ++r)
    for (int c = 0; c < out.cols(); ++c)
      for (int k = 0; k < t.channels(); ++k)
        out(r, c, k) = 0.25 * (t(2 * r, 2 * c, k) + t(2 * r, 2 * c + 1, k) + t(2 * r + 1, 2 * c, k) +
                               t(2 * r + 1, 2 * c + 1, k));
  return out;
}

Tensor downsample_half_backward(const Tensor& grad_out) {
  Tensor g(grad_out.rows() * 2, grad_out.cols() * 2, grad_out.channels());
  for (int r = 0; r < g.rows(); ++r)
    for (int c = 0; c < g.cols(); ++c)
      for (int k = 0; k < g.channels(); ++k) g(r, c, k) = 0.25 * grad_out(r / 2, c / 2, k);
  return g;
}

namespace {

// Taps of one output index of a half-pixel aligned 2x upsampling.
struct UpTap {
  int i0;
  int i1;
  double w0;
  double w1;
};

std::vector<UpTap> upsample_taps(int n, bool wrap) {
  std::vector<UpTap> taps(static_cast<std::size_t>(2 * n));
  for (int o = 0; o < 2 * n; ++o) {
    const double src = (o + 0.5) / 2.0 - 0.5;
    const auto fl = static_cast<long long>(std::floor(src));
    const double f = src - static_cast<double>(fl);
    UpTap t{};
    if (wrap) {
      t.i0 = wrap_index(fl, n);
      t.i1 = wrap_index(fl + 1, n);
    } else {
      t.i0 = static_cast<int>(std::clamp<long long>(fl, 0, n - 1));
      t.i1 = static_cast<int>(std::clamp<long long>(fl + 1, 0, n - 1));
    }
    t.w0 = 1.0 - f;
    t.w1 = f;
    taps[static_cast<std::size_t>(o)] = t;
  }
  return taps;
}

}  // namespace

Tensor upsample_double(const Tensor& t, Seam seam) {
  const auto ty = upsample_taps(t.rows(), false);
  const auto tx = upsample_taps(t.cols(), seam == Seam::Wrap);
  Tensor out(2 * t.rows(), 2 * t.cols(), t.channels());
  for (int r = 0; r < out.rows(); ++r) {
    const UpTap& y = ty[static_cast<std::size_t>(r)];
    for (int c = 0; c < out.cols(); ++c) {
      const UpTap& x = tx[static_cast<std::size_t>(c)];
      for (int k = 0; k < t.channels(); ++k)
        out(r, c, k) = y.w0 * (x.w0 * t(y.i0, x.i0, k) + x.w1 * t(y.i0, x.i1, k)) +
                       y.w1 * (x.w0 * t(y.i1, x.i0, k) + x.w1 * t(y.i1, x.i1, k));
    }
  }
  return out;
}

Tensor upsample_double_backward(const Tensor& grad_out, Seam seam) {
  require(grad_out.rows() % 2 == 0 && grad_out.cols() % 2 == 0, ErrorCode::ShapeMismatch,
          "upsample gradient must have even dimensions");
  const int rows = grad_out.rows() / 2;
  const int cols = grad_out.cols() / 2;
  const auto ty = upsample_taps(rows, false);
  const auto tx = upsample_taps(cols, seam == Seam::Wrap);
  Tensor g(rows, cols, grad_out.channels());
  for (int r = 0; r < grad_out.rows(); ++r) {
    const UpTap& y = ty[static_cast<std::size_t>(r)];
    for (int c = 0; c < grad_out.cols(); ++c) {
      const UpTap& x = tx[static_cast<std::size_t>(c)];
      for (int k = 0; k < g.channels(); ++k) {
        const double v = grad_out(r, c, k);
        g(y.i0, x.i0, k) += y.w0 * x.w0 * v;
        g(y.i0, x.i1, k) += y.w0 * x.w1 * v;
        g(y.i1, x.i0, k) += y.w1 * x.w0 * v;
        g(y.i1, x.i1, k) += y.w1 * x.w1 * v;
      }
    }
  }
  return g;
}

Tensor finite_diff(const Tensor& t, Diff op, Seam seam) {
  Tensor out(t.rows(), t.cols(), t.channels());
  if (t.empty()) return out;
  for_each_stencil_tap(t.rows(), t.cols(), op, seam, [&](int r, int c, int rr, int cc, double w) {
    for (int k = 0; k < t.channels(); ++k) out(r, c, k) += w * t(rr, cc, k);
  });
  return out;
}

Tensor finite_diff_adjoint(const Tensor& g, Diff op, Seam seam) {
  Tensor out(g.rows(), g.cols(), g.channels());
  if (g.empty()) return out;
  for_each_stencil_tap(g.rows(), g.cols(), op, seam, [&](int r, int c, int rr, int cc, double w) {
    for (int k = 0; k < g.channels(); ++k) out(rr, cc, k) += w * g(r, c, k);
  });
  return out;
}

}  // namespace cylsfm
