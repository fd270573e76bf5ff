#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cylsfm/estimation/snippet.hpp"
#include "cylsfm/synthesis/depth_state.hpp"
#include "cylsfm/synthesis/losses.hpp"

namespace cylsfm {

struct OptimConfig {
  double lr_depth = 1e-2;
  double lr_pose = 1e-4;
  double lr_mask = 1e-2;
  int iterations = 1000;  // per pyramid stage
  int stages = 3;        // stage k works at 1/2^(stages-1-k) resolution
  double beta1 = 0.9;
  double beta2 = 0.999;
  double init_depth = 0.0;  // starting depth level; <= 0 picks sqrt(d_min * d_max)
  double init_noise = 0.0;  // std of the initial depth logits around that level
  int warmup = 0;           // linear step-size ramp at the start of every stage
  std::uint64_t seed = 0;
  DepthBounds bounds;

  void validate() const;
};

/// Step-size multiplier for iteration it of n.
double stage_lr_scale(int it, int n, int warmup);

/// Optional starting point (full resolution).
struct DirectInit {
  Tensor depth_logits;
  std::vector<Pose6> poses;
};

struct DirectResult {
  DepthState depth;  // full resolution
  std::vector<Pose6> poses;
  std::vector<double> loss_trace;       // total loss before every update
  std::vector<std::size_t> stage_begin;  // trace index where each stage starts
  bool static_snippet = false;           // frames identical; nothing was optimized
};

/// Coarse-to-fine photometric optimization of per-pixel depth logits, the
/// source poses and (when lambda_e > 0) explainability logits. Each stage
/// evaluates the loss at its own resolution only, so loss_cfg.num_scales is
/// not used here. Within a stage the step sizes ramp up linearly over
/// `warmup` iterations and then follow a cosine decay to 1%.
DirectResult direct_optimize(const Snippet& snip, const OptimConfig& cfg, const LossConfig& loss_cfg,
                             const DirectInit* init = nullptr);

/// Means of consecutive non-overlapping windows (a shorter tail window is
/// dropped unless it is the only one).
std::vector<double> window_means(std::span<const double> trace, std::size_t window);

/// True when every window mean is <= the previous one inside each stage.
bool smoothed_monotone(const DirectResult& result, std::size_t window = 20);

}  // namespace cylsfm
