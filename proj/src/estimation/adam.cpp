#include "cylsfm/estimation/adam.hpp"

#include <cmath>

#include "cylsfm/core/error.hpp"

namespace cylsfm {

void Adam::step(std::span<double> params, std::span<const double> grads, double lr_scale) {
  require(params.size() == m_.size() && grads.size() == m_.size(), ErrorCode::ShapeMismatch,
          "Adam parameter group size changed");
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  const double lr = cfg_.lr * lr_scale;
  for (std::size_t k = 0; k < params.size(); ++k) {
    m_[k] = cfg_.beta1 * m_[k] + (1.0 - cfg_.beta1) * grads[k];
    v_[k] = cfg_.beta2 * v_[k] + (1.0 - cfg_.beta2) * grads[k] * grads[k];
    params[k] -= lr * (m_[k] / c1) / (std::sqrt(v_[k] / c2) + cfg_.eps);
  }
}

}  // namespace cylsfm
