#include "cylsfm/estimation/direct.hpp"

#include <algorithm>
#include <cmath>

#include "cylsfm/core/error.hpp"
#include "cylsfm/core/rng.hpp"
#include "cylsfm/estimation/adam.hpp"
#include "cylsfm/synthesis/view_synthesis.hpp"
#include "cylsfm/tensor/wrap_ops.hpp"

namespace cylsfm {

namespace {

double mean_abs_difference(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a.data()[k] - b.data()[k]);
  return s / static_cast<double>(a.size());
}

std::vector<double> flatten(const std::vector<Pose6>& poses) {
  std::vector<double> out;
  for (const auto& p : poses)
    for (int k = 0; k < 6; ++k) out.push_back(p[k]);
  return out;
}

void unflatten(const std::vector<double>& flat, std::vector<Pose6>& poses) {
  for (std::size_t s = 0; s < poses.size(); ++s)
    for (int k = 0; k < 6; ++k) poses[s][k] = flat[6 * s + k];
}

}  // namespace

double stage_lr_scale(int it, int n, int warmup) {
  if (it < warmup) return static_cast<double>(it + 1) / (warmup + 1);
  const double span = std::max(1, n - warmup);
  const double x = std::min(1.0, (it - warmup) / span);
  return 0.01 + 0.495 * (1.0 + std::cos(kPi * x));
}

void OptimConfig::validate() const {
  require(lr_depth > 0 && lr_pose > 0 && lr_mask > 0, ErrorCode::BadConfig, "step sizes must be positive");
  require(stages >= 1, ErrorCode::BadConfig, "need at least one pyramid stage");
  require(iterations >= 0, ErrorCode::BadConfig, "iterations must be non-negative");
  require(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1, ErrorCode::BadConfig, "moment coefficients must be in [0, 1)");
  require(init_noise >= 0, ErrorCode::BadConfig, "init_noise must be non-negative");
  require(warmup >= 0, ErrorCode::BadConfig, "warmup must be non-negative");
  bounds.validate();
  if (init_depth > 0.0) logit_for_depth(init_depth, bounds);
}

DirectResult direct_optimize(const Snippet& snip, const OptimConfig& cfg, const LossConfig& loss_cfg,
                             const DirectInit* init) {
  snip.validate();
  cfg.validate();
  loss_cfg.validate();
  const int n_src = static_cast<int>(snip.sources.size());
  const CylCamera& cam = snip.camera;
  const Seam seam = seam_of(cam);
  const int factor = 1 << (cfg.stages - 1);
  require(cam.width % factor == 0 && cam.height % factor == 0, ErrorCode::ShapeMismatch,
          "image size not divisible by 2^(stages-1)");

  DirectResult result;
  result.depth.bounds = cfg.bounds;
  result.poses.assign(n_src, Pose6{});
  if (init) {
    require(init->depth_logits.rows() == cam.height && init->depth_logits.cols() == cam.width &&
                init->depth_logits.channels() == 1,
            ErrorCode::ShapeMismatch, "initial depth logits do not match the camera");
    require(init->poses.size() == static_cast<std::size_t>(n_src), ErrorCode::LengthMismatch,
            "need one initial pose per source");
    result.poses = init->poses;
  }

  bool all_static = true;
  for (const auto& s : snip.sources) all_static = all_static && mean_abs_difference(s, snip.target) < 1e-4;
  if (all_static) {
    result.static_snippet = true;
    result.depth.logits = init ? init->depth_logits : Tensor(cam.height, cam.width, 1);
    return result;
  }

  // Image pyramids, finest first.
  std::vector<Tensor> targets{snip.target};
  std::vector<std::vector<Tensor>> sources{snip.sources};
  std::vector<Tensor> init_logits;
  if (init) init_logits.push_back(init->depth_logits);
  for (int l = 1; l < cfg.stages; ++l) {
    targets.push_back(downsample_half(targets.back()));
    std::vector<Tensor> next;
    for (const auto& s : sources.back()) next.push_back(downsample_half(s));
    sources.push_back(std::move(next));
    if (init) init_logits.push_back(downsample_half(init_logits.back()));
  }

  const int coarse = cfg.stages - 1;
  Tensor logits;
  if (init) {
    logits = init_logits[coarse];
  } else {
    logits = Tensor(cam.height / factor, cam.width / factor, 1);
    Rng rng(cfg.seed);
    const double start = cfg.init_depth > 0.0 ? cfg.init_depth : cfg.bounds.neutral_depth();
    const double level = logit_for_depth(start, cfg.bounds);
    for (double& v : logits.values()) v = level + cfg.init_noise * rng.normal();
  }

  const bool use_mask = loss_cfg.lambda_e > 0.0;
  LossConfig stage_cfg = loss_cfg;
  stage_cfg.num_scales = 1;
  std::vector<double> pose_flat = flatten(result.poses);
  Adam pose_opt(pose_flat.size(), {cfg.lr_pose, cfg.beta1, cfg.beta2});
  std::vector<std::vector<Tensor>> masks;

  for (int l = coarse; l >= 0; --l) {
    const CylCamera stage_cam = cam.downscaled(1 << l);
    Adam depth_opt(logits.size(), {cfg.lr_depth, cfg.beta1, cfg.beta2});
    masks.assign(use_mask ? n_src : 0, {});
    for (auto& m : masks) m.push_back(Tensor(stage_cam.height, stage_cam.width, 2));
    std::vector<Adam> mask_opt;
    for (int s = 0; s < static_cast<int>(masks.size()); ++s)
      mask_opt.emplace_back(masks[s][0].size(), AdamConfig{cfg.lr_mask, cfg.beta1, cfg.beta2});
    result.stage_begin.push_back(result.loss_trace.size());

    for (int it = 0; it < cfg.iterations; ++it) {
      const Tensor disparity = disparity_from_logits(logits, cfg.bounds);
      LossInputs in;
      in.target = &targets[l];
      in.sources = sources[l];
      in.camera = stage_cam;
      in.disparity = std::span<const Tensor>(&disparity, 1);
      in.poses = result.poses;
      in.mask_logits = masks;
      LossGradients grads;
      const LossBreakdown loss = total_loss(in, stage_cfg, &grads);
      if (!std::isfinite(loss.total)) throw Error(ErrorCode::Diverged, "loss became non-finite");
      result.loss_trace.push_back(loss.total);

      const double scale = stage_lr_scale(it, cfg.iterations, cfg.warmup);
      const Tensor g_logits = disparity_from_logits_backward(logits, cfg.bounds, grads.disparity[0]);
      depth_opt.step(logits.values(), g_logits.values(), scale);
      const std::vector<double> g_pose = flatten(grads.poses);
      pose_opt.step(pose_flat, g_pose, scale);
      unflatten(pose_flat, result.poses);
      for (std::size_t s = 0; s < masks.size(); ++s)
        mask_opt[s].step(masks[s][0].values(), grads.mask_logits[s][0].values(), scale);
    }
    if (l > 0) logits = upsample_double(logits, seam);
  }

  result.depth.logits = std::move(logits);
  return result;
}

std::vector<double> window_means(std::span<const double> trace, std::size_t window) {
  require(window > 0, ErrorCode::BadArgument, "window must be positive");
  std::vector<double> out;
  for (std::size_t b = 0; b + window <= trace.size(); b += window) {
    double s = 0.0;
    for (std::size_t k = b; k < b + window; ++k) s += trace[k];
    out.push_back(s / static_cast<double>(window));
  }
  if (out.empty() && !trace.empty()) {
    double s = 0.0;
    for (double v : trace) s += v;
    out.push_back(s / static_cast<double>(trace.size()));
  }
  return out;
}

bool smoothed_monotone(const DirectResult& result, std::size_t window) {
  for (std::size_t st = 0; st < result.stage_begin.size(); ++st) {
    const std::size_t b = result.stage_begin[st];
    const std::size_t e = st + 1 < result.stage_begin.size() ? result.stage_begin[st + 1] : result.loss_trace.size();
    const auto means = window_means(std::span<const double>(result.loss_trace).subspan(b, e - b), window);
    for (std::size_t k = 1; k < means.size(); ++k)
      if (means[k] > means[k - 1]) return false;
  }
  return true;
}

}  // namespace cylsfm
