#pragma once

#include "cylsfm/tensor/tensor.hpp"

namespace cylsfm {

/// Horizontal boundary behaviour. Wrap treats column C-1 and column 0 as
/// neighbours; Open is the ordinary bounded image (zero padding for
/// convolution, clamping for resampling, invalid samples past the edge).
enum class Seam { Wrap, Open };

/// Pads k columns on each side: the left pad copies the last k columns, the
/// right pad copies the first k. Throws BadPad when k > cols.
Tensor wrap_pad(const Tensor& t, int k);

/// Convolution with horizontal wrap (or zero) padding of (k_w-1)/2 columns
/// and vertical zero padding of (k_h-1)/2 rows. stride is 1 or 2 and must
/// divide both spatial sizes.
Tensor conv2d(const Tensor& input, const Kernel& kern, int stride, Seam seam = Seam::Wrap);

struct ConvGrads {
  Tensor input;
  Kernel kernel;
};

ConvGrads conv2d_backward(const Tensor& input, const Kernel& kern, int stride, Seam seam,
                          const Tensor& grad_out);

struct SampleResult {
  Tensor samples;  // rows x cols x channels of the image
  Tensor valid;    // rows x cols x 1, 1 where the sample lies in the image
};

struct SampleGrads {
  Tensor image;   // same shape as the sampled image
  Tensor coords;  // same shape as coords
};

/// Bilinear lookup at per-pixel continuous coordinates.
///
/// coords has two channels: column i and row j, with pixel centers at integer
/// positions. With Seam::Wrap the column is taken modulo the image width;
/// rows (and columns with Seam::Open) outside [-0.5, n-0.5] give sample 0 and
/// valid 0, and inside the outer half pixel they are clamped to the edge.
SampleResult bilinear_sample(const Tensor& image, const Tensor& coords, Seam seam = Seam::Wrap);

SampleGrads bilinear_sample_backward(const Tensor& image, const Tensor& coords, Seam seam,
                                     const Tensor& grad_samples);

/// 2x2 mean pooling. Throws ShapeMismatch on odd sizes.
Tensor downsample_half(const Tensor& t);
Tensor downsample_half_backward(const Tensor& grad_out);

/// Bilinear 2x upsampling (half-pixel aligned), wrapping horizontally.
Tensor upsample_double(const Tensor& t, Seam seam = Seam::Wrap);
Tensor upsample_double_backward(const Tensor& grad_out, Seam seam = Seam::Wrap);

// Finite differences, applied per channel. Horizontal stencils index columns
// circularly (Seam::Wrap) or replicate the edge column (Seam::Open); vertical
// stencils replicate the top and bottom rows.
//   grad_x(r,c) = t(r,c+1) - t(r,c)
//   grad_y(r,c) = t(r+1,c) - t(r,c)
//   dxx(r,c)    = t(r,c+1) - 2 t(r,c) + t(r,c-1)
//   dyy(r,c)    = t(r+1,c) - 2 t(r,c) + t(r-1,c)
//   dxy(r,c)    = t(r+1,c+1) - t(r+1,c) - t(r,c+1) + t(r,c)
// Each *_adjoint applies the transposed linear map (the backward pass).
enum class Diff { X, Y, XX, YY, XY };

Tensor finite_diff(const Tensor& t, Diff op, Seam seam = Seam::Wrap);
Tensor finite_diff_adjoint(const Tensor& g, Diff op, Seam seam = Seam::Wrap);

inline Tensor grad_x(const Tensor& t, Seam seam = Seam::Wrap) { return finite_diff(t, Diff::X, seam); }
inline Tensor grad_y(const Tensor& t) { return finite_diff(t, Diff::Y); }
inline Tensor dxx(const Tensor& t, Seam seam = Seam::Wrap) { return finite_diff(t, Diff::XX, seam); }
inline Tensor dyy(const Tensor& t) { return finite_diff(t, Diff::YY); }
inline Tensor dxy(const Tensor& t, Seam seam = Seam::Wrap) { return finite_diff(t, Diff::XY, seam); }

}  // namespace cylsfm
