#include "cylsfm/tensor/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "cylsfm/core/error.hpp"

namespace cylsfm {

Tensor::Tensor(int rows, int cols, int channels, double fill)
    : rows_(rows), cols_(cols), channels_(channels) {
  require(rows >= 0 && cols >= 0 && channels >= 0, ErrorCode::ShapeMismatch, "negative tensor dimension");
  data_.assign(static_cast<std::size_t>(rows) * cols * channels, fill);
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Tensor Tensor::channel_slice(int first, int count) const {
  require(first >= 0 && count >= 0 && first + count <= channels_, ErrorCode::ShapeMismatch,
          "channel slice out of range");
  Tensor out(rows_, cols_, count);
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c)
      for (int k = 0; k < count; ++k) out(r, c, k) = (*this)(r, c, first + k);
  return out;
}

Tensor Tensor::roll_cols(int shift) const {
  Tensor out(rows_, cols_, channels_);
  if (cols_ == 0) return out;
  const int s = ((shift % cols_) + cols_) % cols_;
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) {
      const int dst = (c + s) % cols_;
      for (int k = 0; k < channels_; ++k) out(r, dst, k) = (*this)(r, c, k);
    }
  return out;
}

Tensor& Tensor::operator+=(const Tensor& o) {
  require(same_shape(o), ErrorCode::ShapeMismatch, "tensor shapes differ in +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Tensor& Tensor::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor concat_channels(std::span<const Tensor> parts) {
  require(!parts.empty(), ErrorCode::ShapeMismatch, "nothing to concatenate");
  const int rows = parts.front().rows();
  const int cols = parts.front().cols();
  int total = 0;
  for (const Tensor& p : parts) {
    require(p.rows() == rows && p.cols() == cols, ErrorCode::ShapeMismatch, "concat spatial size mismatch");
    total += p.channels();
  }
  Tensor out(rows, cols, total);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      int k0 = 0;
      for (const Tensor& p : parts) {
        for (int k = 0; k < p.channels(); ++k) out(r, c, k0 + k) = p(r, c, k);
        k0 += p.channels();
      }
    }
  return out;
}

Kernel::Kernel(int k_h, int k_w, int in_channels, int out_channels)
    : k_h(k_h), k_w(k_w), in_channels(in_channels), out_channels(out_channels) {
  require(k_h > 0 && k_w > 0 && k_h % 2 == 1 && k_w % 2 == 1, ErrorCode::ShapeMismatch,
          "kernel sizes must be odd and positive");
  require(in_channels > 0 && out_channels > 0, ErrorCode::ShapeMismatch, "kernel channels must be positive");
  weights.assign(static_cast<std::size_t>(k_h) * k_w * in_channels * out_channels, 0.0);
  bias.assign(static_cast<std::size_t>(out_channels), 0.0);
}

}  // namespace cylsfm
