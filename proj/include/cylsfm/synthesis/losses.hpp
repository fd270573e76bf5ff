#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "cylsfm/camera/cylinder.hpp"
#include "cylsfm/synthesis/pose.hpp"
#include "cylsfm/tensor/tensor.hpp"
#include "cylsfm/tensor/wrap_ops.hpp"

namespace cylsfm {

enum class SmoothMode {
  SecondOrder,           // |dxx| + |dxy| + |dyx| + |dyy| on disparity
  ImageAware,            // exp(-g) * (|dxx| + |dxy| + |dyy|), g = image gradient magnitude
  ImageAwareFirstOrder,  // exp(-g) * (|dx| + |dy|)
};

std::string_view to_string(SmoothMode mode) noexcept;
SmoothMode smooth_mode_from_string(std::string_view name);

struct LossConfig {
  double lambda_s = 2.0;  // second-order smoothness weight
  double lambda_e = 0.0;  // explainability weight; 0 disables the mask
  double lambda_m = 0.2;  // image-aware smoothness weight
  int num_scales = 4;
  SmoothMode smooth_mode = SmoothMode::SecondOrder;
  bool wrap = true;  // false: treat full panoramas as open at the seam (ablation)

  void validate() const;
};

struct PhotometricGrads {
  Tensor projected;
  Tensor weights;
};

/// Mean of E * |I_proj - I_target| over valid pixels and channels. A null
/// weights pointer means E = 1. Throws EmptyMask if nothing is valid.
double photometric_loss(const Tensor& projected, const Tensor& target, const Tensor* weights,
                        const Tensor& valid, PhotometricGrads* grads = nullptr);

double smooth_loss_second_order(const Tensor& disparity, Seam seam, Tensor* grad = nullptr);

/// Per-pixel attenuation exp(-g), g the channel mean of the first-difference
/// gradient magnitude of the image.
Tensor edge_weights(const Tensor& image, Seam seam);

/// order 2: exp(-g) (|dxx| + |dxy| + |dyy|); order 1: exp(-g) (|dx| + |dy|).
double smooth_loss_image_aware(const Tensor& disparity, const Tensor& image, Seam seam, int order,
                               Tensor* grad = nullptr);

/// Probability of the "explained" channel (channel 0) of two-channel logits.
Tensor mask_weights(const Tensor& logits);
Tensor mask_weights_backward(const Tensor& logits, const Tensor& grad_weights);

/// Mean cross-entropy of mask_weights against the all-explained label.
double explainability_loss(const Tensor& logits, Tensor* grad = nullptr);

struct LossBreakdown {
  double total = 0.0;
  double pixel = 0.0;   // summed photometric terms
  double smooth = 0.0;  // weighted smoothness terms
  double exp = 0.0;     // weighted explainability terms
};

struct LossInputs {
  const Tensor* target = nullptr;
  std::span<const Tensor> sources;
  CylCamera camera;
  std::span<const Tensor> disparity;  // one map per scale, finest first
  std::span<const Pose6> poses;       // one per source
  /// mask_logits[source][scale], two channels each; ignored when lambda_e = 0.
  std::span<const std::vector<Tensor>> mask_logits;
};

struct LossGradients {
  std::vector<Tensor> disparity;
  std::vector<Pose6> poses;
  std::vector<std::vector<Tensor>> mask_logits;
};

/// Sum over scales of photometric terms for every source, the smoothness
/// term weighted by lambda / 2^scale, and lambda_e times the explainability
/// terms. Images are mean-pooled to each scale.
LossBreakdown total_loss(const LossInputs& in, const LossConfig& cfg, LossGradients* grads = nullptr);

}  // namespace cylsfm
