#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cylsfm/estimation/params.hpp"
#include "cylsfm/synthesis/depth_state.hpp"
#include "cylsfm/synthesis/pose.hpp"
#include "cylsfm/tensor/wrap_ops.hpp"

namespace cylsfm {

struct NetSpec {
  std::vector<int> depth_widths{8, 16, 32, 32, 32};  // one stride-2 level each
  std::vector<int> pose_widths{8, 16, 32, 32, 32};
  int kernel = 3;
  int num_scales = 4;
  int num_sources = 2;
  bool wrap = true;  // false: zero padding and clamped upsampling at the seam
  DepthBounds bounds;

  void validate() const;
  Seam seam() const { return wrap ? Seam::Wrap : Seam::Open; }
  /// Input sizes must be multiples of this.
  int size_divisor() const;
};

/// Rectifier; records the sign of every input in the branch trace.
Tensor relu(const Tensor& x);
Tensor relu_backward(const Tensor& pre, const Tensor& grad);

/// Encoder of stride-2 conv + ReLU levels, decoder of upsample + skip concat
/// + conv + ReLU levels, and a sigmoid disparity head at each of the
/// num_scales finest decoder levels.
class DepthNet {
 public:
  struct Cache {
    std::vector<Tensor> enc;      // enc[0] = image, enc[l+1] = relu(enc_pre[l])
    std::vector<Tensor> enc_pre;
    std::vector<Tensor> dec_in;   // concat(upsampled, skip) per level
    std::vector<Tensor> dec_pre;
    std::vector<Tensor> dec;      // relu(dec_pre)
    std::vector<Tensor> logits;   // head outputs
  };

  DepthNet() = default;
  DepthNet(const NetSpec& spec, ParamStore& store);

  /// Disparity pyramid, finest first.
  std::vector<Tensor> forward(const ParamStore& store, const Tensor& image, Cache* cache = nullptr) const;
  /// Accumulates parameter gradients given d loss / d disparity per scale.
  void backward(ParamStore& store, const Cache& cache, std::span<const Tensor> grad_disparity) const;
  void init(ParamStore& store, Rng& rng) const;

 private:
  NetSpec spec_;
  std::vector<ConvLayer> enc_;
  std::vector<ConvLayer> dec_;
  std::vector<ConvLayer> heads_;
};

struct PoseMaskOutput {
  std::vector<Pose6> poses;                      // target -> source
  std::vector<std::vector<Tensor>> mask_logits;  // [source][scale], two channels
};

/// Stride-2 conv + ReLU encoder over the stacked target and sources; the pose
/// head pools the top features globally and applies one linear layer whose 6
/// outputs per source are scaled by 0.01; mask heads are convolutions on
/// encoder levels upsampled once to their scale.
///
/// The pooling takes three global averages per channel, weighted by 1,
/// cos(theta) and sin(theta) of the column azimuth. A plain average of
/// wrap-convolved features is invariant to yaw, so it cannot tell which
/// horizontal direction the camera moved in.
class PoseMaskNet {
 public:
  static constexpr double kPoseScale = 0.01;

  struct Cache {
    std::vector<Tensor> enc;  // enc[0] = stacked input
    std::vector<Tensor> enc_pre;
    Tensor pooled;            // 1 x 1 x 3 width
    std::vector<Tensor> mask_pre;  // before upsampling, per scale
    bool with_masks = false;
  };

  PoseMaskNet() = default;
  PoseMaskNet(const NetSpec& spec, ParamStore& store);

  PoseMaskOutput forward(const ParamStore& store, const Tensor& target, std::span<const Tensor> sources,
                         bool with_masks, Cache* cache = nullptr) const;
  /// grad_masks may be empty when the forward pass skipped the masks.
  void backward(ParamStore& store, const Cache& cache, std::span<const Pose6> grad_poses,
                std::span<const std::vector<Tensor>> grad_masks) const;
  void init(ParamStore& store, Rng& rng) const;

 private:
  NetSpec spec_;
  std::vector<ConvLayer> enc_;
  ConvLayer linear_;
  std::vector<ConvLayer> mask_heads_;
};

/// Both networks sharing one parameter store.
struct Model {
  NetSpec spec;
  ParamStore params;
  DepthNet depth;
  PoseMaskNet pose;

  explicit Model(const NetSpec& spec);
  /// Xavier-uniform weights from a fixed seed, zero biases.
  void init(std::uint64_t seed);
};

}  // namespace cylsfm
