#include "cylsfm/estimation/nets.hpp"

#include <cmath>
#include <string>

#include "cylsfm/camera/cylinder.hpp"
#include "cylsfm/core/branch_trace.hpp"
#include "cylsfm/core/error.hpp"
#include "cylsfm/core/rng.hpp"

namespace cylsfm {

namespace {

Tensor sigmoid_map(const Tensor& z, const DepthBounds& b) { return disparity_from_logits(z, b); }

void add_into(Tensor& acc, const Tensor& g) {
  if (acc.empty())
    acc = g;
  else
    acc += g;
}

// Azimuth weights of a feature-map column for the harmonic pooling.
std::pair<double, double> column_harmonics(int col, int cols) {
  const double theta = kTwoPi * (col + 0.5) / cols - kPi;
  return {std::cos(theta), std::sin(theta)};
}

// Splits the channels of g into [0, first) and [first, end).
std::pair<Tensor, Tensor> split_channels(const Tensor& g, int first) {
  return {g.channel_slice(0, first), g.channel_slice(first, g.channels() - first)};
}

}  // namespace

void NetSpec::validate() const {
  require(!depth_widths.empty() && !pose_widths.empty(), ErrorCode::BadConfig, "encoders need at least one level");
  for (int w : depth_widths) require(w > 0, ErrorCode::BadConfig, "layer widths must be positive");
  for (int w : pose_widths) require(w > 0, ErrorCode::BadConfig, "layer widths must be positive");
  require(kernel > 0 && kernel % 2 == 1, ErrorCode::BadConfig, "kernel size must be odd");
  require(num_scales >= 1 && num_scales <= static_cast<int>(depth_widths.size()), ErrorCode::BadConfig,
          "num_scales must be within the depth encoder depth");
  require(num_scales <= static_cast<int>(pose_widths.size()), ErrorCode::BadConfig,
          "num_scales must be within the pose encoder depth");
  require(num_sources >= 1, ErrorCode::BadConfig, "need at least one source");
  bounds.validate();
}

int NetSpec::size_divisor() const {
  const auto levels = std::max(depth_widths.size(), pose_widths.size());
  return 1 << levels;
}

Tensor relu(const Tensor& x) {
  Tensor y = x;
  const bool trace = branch_trace::tls_state.enabled;
  for (double& v : y.values()) {
    if (trace) branch_trace::note(v > 0.0);
    if (v < 0.0) v = 0.0;
  }
  return y;
}

Tensor relu_backward(const Tensor& pre, const Tensor& grad) {
  Tensor g = grad;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (pre.data()[k] <= 0.0) g.data()[k] = 0.0;
  return g;
}

DepthNet::DepthNet(const NetSpec& spec, ParamStore& store) : spec_(spec) {
  spec.validate();
  const auto& w = spec.depth_widths;
  const int L = static_cast<int>(w.size());
  int in = 3;
  for (int l = 0; l < L; ++l) {
    enc_.push_back(ConvLayer::create(store, "depth.enc" + std::to_string(l), spec.kernel, in, w[l], 2));
    in = w[l];
  }
  // Decoder level l works at 1/2^l resolution and outputs w[l] channels.
  dec_.resize(L);
  for (int l = L - 1; l >= 0; --l) {
    const int up = l == L - 1 ? w[L - 1] : w[l + 1];
    const int skip = l == 0 ? 3 : w[l - 1];
    dec_[l] = ConvLayer::create(store, "depth.dec" + std::to_string(l), spec.kernel, up + skip, w[l], 1);
  }
  for (int s = 0; s < spec.num_scales; ++s)
    heads_.push_back(ConvLayer::create(store, "depth.head" + std::to_string(s), spec.kernel, w[s], 1, 1));
}

void DepthNet::init(ParamStore& store, Rng& rng) const {
  for (const auto& c : enc_) c.init_xavier(store, rng);
  for (const auto& c : dec_) c.init_xavier(store, rng);
  for (const auto& c : heads_) c.init_xavier(store, rng);
}

std::vector<Tensor> DepthNet::forward(const ParamStore& store, const Tensor& image, Cache* cache) const {
  const int L = static_cast<int>(enc_.size());
  const int div = 1 << L;
  require(image.channels() == 3, ErrorCode::ShapeMismatch, "depth net expects an RGB image");
  require(image.rows() % div == 0 && image.cols() % div == 0, ErrorCode::ShapeMismatch,
          "image size must be divisible by 2^(encoder depth)");
  const Seam seam = spec_.seam();
  Cache local;
  Cache& c = cache ? *cache : local;
  c = Cache{};
  c.enc.push_back(image);
  for (int l = 0; l < L; ++l) {
    c.enc_pre.push_back(conv2d(c.enc[l], enc_[l].kernel(store), 2, seam));
    c.enc.push_back(relu(c.enc_pre[l]));
  }
  c.dec_in.resize(L);
  c.dec_pre.resize(L);
  c.dec.resize(L);
  for (int l = L - 1; l >= 0; --l) {
    const Tensor& below = l == L - 1 ? c.enc[L] : c.dec[l + 1];
    const Tensor parts[2] = {upsample_double(below, seam), c.enc[l]};
    c.dec_in[l] = concat_channels(parts);
    c.dec_pre[l] = conv2d(c.dec_in[l], dec_[l].kernel(store), 1, seam);
    c.dec[l] = relu(c.dec_pre[l]);
  }
  std::vector<Tensor> out;
  for (int s = 0; s < spec_.num_scales; ++s) {
    c.logits.push_back(conv2d(c.dec[s], heads_[s].kernel(store), 1, seam));
    out.push_back(sigmoid_map(c.logits[s], spec_.bounds));
  }
  return out;
}

void DepthNet::backward(ParamStore& store, const Cache& c, std::span<const Tensor> grad_disparity) const {
  const int L = static_cast<int>(enc_.size());
  require(static_cast<int>(grad_disparity.size()) == spec_.num_scales, ErrorCode::ShapeMismatch,
          "one disparity gradient per scale required");
  const Seam seam = spec_.seam();
  std::vector<Tensor> g_dec(L);
  std::vector<Tensor> g_enc(L + 1);
  for (int s = 0; s < spec_.num_scales; ++s) {
    const Tensor gz = disparity_from_logits_backward(c.logits[s], spec_.bounds, grad_disparity[s]);
    const ConvGrads cg = conv2d_backward(c.dec[s], heads_[s].kernel(store), 1, seam, gz);
    heads_[s].accumulate(store, cg.kernel);
    add_into(g_dec[s], cg.input);
  }
  for (int l = 0; l < L; ++l) {
    if (g_dec[l].empty()) continue;
    const Tensor gp = relu_backward(c.dec_pre[l], g_dec[l]);
    const ConvGrads cg = conv2d_backward(c.dec_in[l], dec_[l].kernel(store), 1, seam, gp);
    dec_[l].accumulate(store, cg.kernel);
    const Tensor& below = l == L - 1 ? c.enc[L] : c.dec[l + 1];
    auto [g_up, g_skip] = split_channels(cg.input, below.channels());
    const Tensor g_below = upsample_double_backward(g_up, seam);
    if (l == L - 1)
      add_into(g_enc[L], g_below);
    else
      add_into(g_dec[l + 1], g_below);
    if (l > 0) add_into(g_enc[l], g_skip);
  }
  for (int l = L - 1; l >= 0; --l) {
    if (g_enc[l + 1].empty()) continue;
    const Tensor gp = relu_backward(c.enc_pre[l], g_enc[l + 1]);
    const ConvGrads cg = conv2d_backward(c.enc[l], enc_[l].kernel(store), 2, seam, gp);
    enc_[l].accumulate(store, cg.kernel);
    if (l > 0) add_into(g_enc[l], cg.input);
  }
}

PoseMaskNet::PoseMaskNet(const NetSpec& spec, ParamStore& store) : spec_(spec) {
  spec.validate();
  int in = 3 * (1 + spec.num_sources);
  for (std::size_t l = 0; l < spec.pose_widths.size(); ++l) {
    enc_.push_back(ConvLayer::create(store, "pose.enc" + std::to_string(l), spec.kernel, in, spec.pose_widths[l], 2));
    in = spec.pose_widths[l];
  }
  linear_ = ConvLayer::create(store, "pose.linear", 1, 3 * in, 6 * spec.num_sources, 1);
  for (int s = 0; s < spec.num_scales; ++s)
    mask_heads_.push_back(ConvLayer::create(store, "mask.head" + std::to_string(s), spec.kernel, spec.pose_widths[s],
                                            2 * spec.num_sources, 1));
}

void PoseMaskNet::init(ParamStore& store, Rng& rng) const {
  for (const auto& c : enc_) c.init_xavier(store, rng);
  linear_.init_xavier(store, rng);
  for (const auto& c : mask_heads_) c.init_xavier(store, rng);
}

PoseMaskOutput PoseMaskNet::forward(const ParamStore& store, const Tensor& target, std::span<const Tensor> sources,
                                    bool with_masks, Cache* cache) const {
  require(static_cast<int>(sources.size()) == spec_.num_sources, ErrorCode::ShapeMismatch,
          "source count does not match the network");
  const int L = static_cast<int>(enc_.size());
  const int div = 1 << L;
  require(target.rows() % div == 0 && target.cols() % div == 0, ErrorCode::ShapeMismatch,
          "image size must be divisible by 2^(encoder depth)");
  const Seam seam = spec_.seam();
  Cache local;
  Cache& c = cache ? *cache : local;
  c = Cache{};
  c.with_masks = with_masks;
  std::vector<Tensor> stack{target};
  stack.insert(stack.end(), sources.begin(), sources.end());
  for (const auto& t : stack) require(t.same_shape(target), ErrorCode::ShapeMismatch, "snippet images differ in shape");
  c.enc.push_back(concat_channels(stack));
  for (int l = 0; l < L; ++l) {
    c.enc_pre.push_back(conv2d(c.enc[l], enc_[l].kernel(store), 2, seam));
    c.enc.push_back(relu(c.enc_pre[l]));
  }
  const Tensor& top = c.enc[L];
  const int w = top.channels();
  c.pooled = Tensor(1, 1, 3 * w);
  const double n = static_cast<double>(top.rows()) * top.cols();
  for (int col = 0; col < top.cols(); ++col) {
    const auto [cs, sn] = column_harmonics(col, top.cols());
    for (int r = 0; r < top.rows(); ++r)
      for (int k = 0; k < w; ++k) {
        const double v = top(r, col, k) / n;
        c.pooled(0, 0, k) += v;
        c.pooled(0, 0, w + k) += v * cs;
        c.pooled(0, 0, 2 * w + k) += v * sn;
      }
  }
  const Tensor raw = conv2d(c.pooled, linear_.kernel(store), 1, seam);

  PoseMaskOutput out;
  for (int s = 0; s < spec_.num_sources; ++s) {
    Pose6 p;
    for (int k = 0; k < 6; ++k) p[k] = kPoseScale * raw(0, 0, 6 * s + k);
    out.poses.push_back(p);
  }
  if (with_masks) {
    out.mask_logits.assign(spec_.num_sources, {});
    for (int s = 0; s < spec_.num_scales; ++s) {
      c.mask_pre.push_back(conv2d(c.enc[s + 1], mask_heads_[s].kernel(store), 1, seam));
      const Tensor up = upsample_double(c.mask_pre[s], seam);
      for (int k = 0; k < spec_.num_sources; ++k) out.mask_logits[k].push_back(up.channel_slice(2 * k, 2));
    }
  }
  return out;
}

void PoseMaskNet::backward(ParamStore& store, const Cache& c, std::span<const Pose6> grad_poses,
                           std::span<const std::vector<Tensor>> grad_masks) const {
  const int L = static_cast<int>(enc_.size());
  const Seam seam = spec_.seam();
  require(static_cast<int>(grad_poses.size()) == spec_.num_sources, ErrorCode::ShapeMismatch,
          "one pose gradient per source required");
  std::vector<Tensor> g_enc(L + 1);

  Tensor g_raw(1, 1, 6 * spec_.num_sources);
  for (int s = 0; s < spec_.num_sources; ++s)
    for (int k = 0; k < 6; ++k) g_raw(0, 0, 6 * s + k) = kPoseScale * grad_poses[s][k];
  const ConvGrads lg = conv2d_backward(c.pooled, linear_.kernel(store), 1, seam, g_raw);
  linear_.accumulate(store, lg.kernel);
  const Tensor& top = c.enc[L];
  const int w = top.channels();
  Tensor g_top(top.rows(), top.cols(), w);
  const double n = static_cast<double>(top.rows()) * top.cols();
  for (int col = 0; col < top.cols(); ++col) {
    const auto [cs, sn] = column_harmonics(col, top.cols());
    for (int r = 0; r < top.rows(); ++r)
      for (int k = 0; k < w; ++k)
        g_top(r, col, k) = (lg.input(0, 0, k) + cs * lg.input(0, 0, w + k) + sn * lg.input(0, 0, 2 * w + k)) / n;
  }
  g_enc[L] = std::move(g_top);

  if (c.with_masks && !grad_masks.empty()) {
    require(static_cast<int>(grad_masks.size()) == spec_.num_sources, ErrorCode::ShapeMismatch,
            "one mask gradient pyramid per source required");
    for (int s = 0; s < spec_.num_scales; ++s) {
      std::vector<Tensor> parts;
      for (int k = 0; k < spec_.num_sources; ++k) parts.push_back(grad_masks[k][s]);
      const Tensor g_up = concat_channels(parts);
      const Tensor g_pre = upsample_double_backward(g_up, seam);
      const ConvGrads cg = conv2d_backward(c.enc[s + 1], mask_heads_[s].kernel(store), 1, seam, g_pre);
      mask_heads_[s].accumulate(store, cg.kernel);
      add_into(g_enc[s + 1], cg.input);
    }
  }
  for (int l = L - 1; l >= 0; --l) {
    if (g_enc[l + 1].empty()) continue;
    const Tensor gp = relu_backward(c.enc_pre[l], g_enc[l + 1]);
    const ConvGrads cg = conv2d_backward(c.enc[l], enc_[l].kernel(store), 2, seam, gp);
    enc_[l].accumulate(store, cg.kernel);
    if (l > 0) add_into(g_enc[l], cg.input);
  }
}

Model::Model(const NetSpec& s) : spec(s), depth(s, params), pose(s, params) {}

void Model::init(std::uint64_t seed) {
  Rng rng(seed);
  depth.init(params, rng);
  pose.init(params, rng);
}

}  // namespace cylsfm
