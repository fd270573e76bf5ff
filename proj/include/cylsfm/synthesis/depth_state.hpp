#pragma once

#include "cylsfm/tensor/tensor.hpp"

namespace cylsfm {

struct DepthBounds {
  double d_min = 0.1;
  double d_max = 100.0;

  double disparity_lo() const { return 1.0 / d_max; }
  double disparity_hi() const { return 1.0 / d_min; }
  /// Geometric mean of the bounds, the middle of the range in log depth.
  double neutral_depth() const;
  void validate() const;
};

double sigmoid(double x) noexcept;

/// disparity = 1/d_max + (1/d_min - 1/d_max) * sigmoid(logit).
Tensor disparity_from_logits(const Tensor& logits, const DepthBounds& bounds);

/// Logit whose disparity is 1 / depth. Throws BadConfig outside the bounds.
double logit_for_depth(double depth, const DepthBounds& bounds);

/// Chain rule through the sigmoid map, given d loss / d disparity.
Tensor disparity_from_logits_backward(const Tensor& logits, const DepthBounds& bounds, const Tensor& grad_disparity);

/// Elementwise 1 / x.
Tensor reciprocal(const Tensor& t);

/// Unconstrained per-pixel depth parameterization.
struct DepthState {
  Tensor logits;
  DepthBounds bounds;

  Tensor disparity() const { return disparity_from_logits(logits, bounds); }
  Tensor depth() const { return reciprocal(disparity()); }
};

}  // namespace cylsfm
