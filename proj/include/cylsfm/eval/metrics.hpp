#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cylsfm/estimation/snippet.hpp"
#include "cylsfm/synthesis/depth_state.hpp"
#include "cylsfm/synthesis/pose.hpp"
#include "cylsfm/tensor/tensor.hpp"

namespace cylsfm {

struct DepthMetrics {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double rmse = 0.0;
  double rmse_log = 0.0;
  double delta1 = 0.0;  // fraction with max(p/g, g/p) < 1.25
  double delta2 = 0.0;  // < 1.25^2
  double delta3 = 0.0;  // < 1.25^3
};

/// Pixels whose ground truth lies within the depth bounds.
Tensor default_depth_mask(const Tensor& gt, const DepthBounds& bounds = {});

/// Errors of pred against gt over mask != 0. With median_scale, pred is first
/// multiplied by median(gt) / median(pred) over the mask (the median of an
/// even count is the mean of the two middle values). Throws EmptyMask and
/// NonPositiveDepth.
DepthMetrics depth_metrics(const Tensor& pred, const Tensor& gt, const Tensor& mask, bool median_scale = true);

/// median(gt) / median(pred) over mask != 0.
double median_scale_factor(const Tensor& pred, const Tensor& gt, const Tensor& mask);

/// Mean |I_proj - I_target| over valid pixels and channels within `band`
/// columns of either side of the seam, reconstructing the target from each
/// source through `depth` and `poses`. Throws EmptyMask.
double seam_photometric_error(const Snippet& s, const Tensor& depth, std::span<const Pose6> poses, int band);

struct AteReport {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over snippets
  int count = 0;
  std::vector<double> per_snippet;
};

using Trajectory = std::vector<Eigen::Vector3d>;

/// Mean absolute trajectory error of each snippet after anchoring both
/// trajectories at their first frame and scaling pred by the least-squares
/// factor. Throws LengthMismatch.
AteReport ate(const std::vector<Trajectory>& pred, const std::vector<Trajectory>& gt);

/// Camera centres of (previous, target, next) in target coordinates, from the
/// two target -> source poses.
Trajectory snippet_positions(const Pose6& to_prev, const Pose6& to_next);

/// One `name=... abs_rel=...` line per image plus an `aggregate` line with the
/// per-image mean, columns in the usual table order.
std::string format_depth_report(const std::vector<std::string>& names, const std::vector<DepthMetrics>& rows);

/// One line per snippet and an aggregate line with mean, std and count.
std::string format_ate_report(const AteReport& report);

}  // namespace cylsfm
