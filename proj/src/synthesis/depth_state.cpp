#include "cylsfm/synthesis/depth_state.hpp"

#include <cmath>

#include "cylsfm/core/error.hpp"

namespace cylsfm {

void DepthBounds::validate() const {
  require(d_min > 0.0 && d_max > d_min && std::isfinite(d_max), ErrorCode::BadArgument,
          "depth bounds must satisfy 0 < d_min < d_max");
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor disparity_from_logits(const Tensor& logits, const DepthBounds& bounds) {
  const double lo = bounds.disparity_lo();
  const double span = bounds.disparity_hi() - lo;
  Tensor out(logits.rows(), logits.cols(), logits.channels());
  auto src = logits.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = lo + span * sigmoid(src[i]);
  return out;
}

Tensor disparity_from_logits_backward(const Tensor& logits, const DepthBounds& bounds,
                                      const Tensor& grad_disparity) {
  require(logits.same_shape(grad_disparity), ErrorCode::ShapeMismatch, "disparity gradient shape mismatch");
  const double span = bounds.disparity_hi() - bounds.disparity_lo();
  Tensor out(logits.rows(), logits.cols(), logits.channels());
  auto src = logits.values();
  auto g = grad_disparity.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double s = sigmoid(src[i]);
    dst[i] = g[i] * span * s * (1.0 - s);
  }
  return out;
}

Tensor reciprocal(const Tensor& t) {
  Tensor out(t.rows(), t.cols(), t.channels());
  auto src = t.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = 1.0 / src[i];
  return out;
}

double DepthBounds::neutral_depth() const { return std::sqrt(d_min * d_max); }

double logit_for_depth(double depth, const DepthBounds& bounds) {
  require(depth > bounds.d_min && depth < bounds.d_max, ErrorCode::BadConfig, "depth outside the bounds");
  const double u = (1.0 / depth - bounds.disparity_lo()) / (bounds.disparity_hi() - bounds.disparity_lo());
  return std::log(u / (1.0 - u));
}

}  // namespace cylsfm
