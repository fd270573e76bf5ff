#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cylsfm {

/// Dense rows x cols x channels array of doubles, row-major with channels
/// innermost.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int rows, int cols, int channels, double fill = 0.0);

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  int channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  bool same_shape(const Tensor& o) const noexcept {
    return rows_ == o.rows_ && cols_ == o.cols_ && channels_ == o.channels_;
  }

  double& operator()(int r, int c, int k = 0) noexcept { return data_[index(r, c, k)]; }
  double operator()(int r, int c, int k = 0) const noexcept { return data_[index(r, c, k)]; }

  double* ptr(int r, int c, int k = 0) noexcept { return data_.data() + index(r, c, k); }
  const double* ptr(int r, int c, int k = 0) const noexcept { return data_.data() + index(r, c, k); }

  std::size_t index(int r, int c, int k = 0) const noexcept {
    return (static_cast<std::size_t>(r) * cols_ + c) * channels_ + k;
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  void fill(double v);

  /// Channels [first, first + count) as a new tensor.
  Tensor channel_slice(int first, int count) const;

  /// Circular shift of columns: out(r, c) = in(r, c - shift mod cols).
  Tensor roll_cols(int shift) const;

  Tensor& operator+=(const Tensor& o);
  Tensor& operator*=(double s);

  bool all_finite() const noexcept;

  bool operator==(const Tensor&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

/// Stacks tensors of equal spatial size along the channel axis.
Tensor concat_channels(std::span<const Tensor> parts);

/// Convolution kernel; weights laid out [k_h][k_w][in][out].
struct Kernel {
  int k_h = 0;
  int k_w = 0;
  int in_channels = 0;
  int out_channels = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  Kernel() = default;
  Kernel(int k_h, int k_w, int in_channels, int out_channels);

  double& at(int ky, int kx, int ci, int co) noexcept {
    return weights[((static_cast<std::size_t>(ky) * k_w + kx) * in_channels + ci) * out_channels + co];
  }
  double at(int ky, int kx, int ci, int co) const noexcept {
    return weights[((static_cast<std::size_t>(ky) * k_w + kx) * in_channels + ci) * out_channels + co];
  }
  double* ptr(int ky, int kx) noexcept { return &at(ky, kx, 0, 0); }
  const double* ptr(int ky, int kx) const noexcept {
    return weights.data() + (static_cast<std::size_t>(ky) * k_w + kx) * in_channels * out_channels;
  }
};

}  // namespace cylsfm
