#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cylsfm {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adaptive-moment update for one flat parameter group.
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t size, AdamConfig cfg) : cfg_(cfg), m_(size, 0.0), v_(size, 0.0) {}

  /// params -= lr_scale * lr * mhat / (sqrt(vhat) + eps).
  void step(std::span<double> params, std::span<const double> grads, double lr_scale = 1.0);

  const AdamConfig& config() const noexcept { return cfg_; }
  std::int64_t steps() const noexcept { return t_; }
  std::vector<double>& first_moment() noexcept { return m_; }
  std::vector<double>& second_moment() noexcept { return v_; }
  const std::vector<double>& first_moment() const noexcept { return m_; }
  const std::vector<double>& second_moment() const noexcept { return v_; }
  void set_steps(std::int64_t t) noexcept { t_ = t; }

 private:
  AdamConfig cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::int64_t t_ = 0;
};

}  // namespace cylsfm
