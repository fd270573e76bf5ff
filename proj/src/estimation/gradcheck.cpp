#include "cylsfm/estimation/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "cylsfm/core/branch_trace.hpp"
#include "cylsfm/core/error.hpp"
#include "cylsfm/core/rng.hpp"
#include "cylsfm/estimation/nets.hpp"
#include "cylsfm/synthesis/losses.hpp"
#include "cylsfm/synthesis/view_synthesis.hpp"
#include "cylsfm/tensor/wrap_ops.hpp"

namespace cylsfm {

namespace {

constexpr double kStep = 1e-5;
constexpr double kFloor = 1e-5;
constexpr int kProbesPerGroup = 12;

Tensor random_tensor(Rng& rng, int r, int c, int k, double lo, double hi) {
  Tensor t(r, c, k);
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

double dot(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a.data()[k] * b.data()[k];
  return s;
}

class Prober {
 public:
  Prober(GradCheckResult& res, std::function<double()> f) : res_(res), f_(std::move(f)) {}

  void probe(double& param, double analytic) {
    const double x0 = param;
    double fp = 0.0, fm = 0.0;
    std::uint64_t hp = 0, hm = 0;
    {
      param = x0 + kStep;
      branch_trace::Scope scope;
      fp = f_();
      hp = scope.hash();
    }
    {
      param = x0 - kStep;
      branch_trace::Scope scope;
      fm = f_();
      hm = scope.hash();
    }
    param = x0;
    if (hp != hm) {
      ++res_.skipped;
      return;
    }
    const double numeric = (fp - fm) / (2.0 * kStep);
    const double err = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), kFloor});
    res_.max_rel_error = std::max(res_.max_rel_error, err);
    ++res_.probes;
  }

  /// Probes a random subset of entries of values against grads.
  void probe_some(Rng& rng, std::span<double> values, std::span<const double> grads) {
    const int n = std::min<int>(kProbesPerGroup, static_cast<int>(values.size()));
    for (int k = 0; k < n; ++k) {
      const auto idx = rng.index(values.size());
      probe(values[idx], grads[idx]);
    }
  }

 private:
  GradCheckResult& res_;
  std::function<double()> f_;
};

void check_conv(GradCheckResult& res, Rng& rng, int trial) {
  const int stride = 1 + trial % 2;
  const Seam seam = trial % 4 < 2 ? Seam::Wrap : Seam::Open;
  Tensor input = random_tensor(rng, 6, 8, 2, -1, 1);
  Kernel kern(3, 3, 2, 3);
  for (double& v : kern.weights) v = rng.uniform(-1, 1);
  for (double& v : kern.bias) v = rng.uniform(-1, 1);
  const Tensor w = random_tensor(rng, 6 / stride, 8 / stride, 3, -1, 1);
  auto f = [&] { return dot(conv2d(input, kern, stride, seam), w); };
  const ConvGrads g = conv2d_backward(input, kern, stride, seam, w);
  Prober p(res, f);
  p.probe_some(rng, input.values(), g.input.values());
  p.probe_some(rng, kern.weights, g.kernel.weights);
  p.probe_some(rng, kern.bias, g.kernel.bias);
}

void check_sampler(GradCheckResult& res, Rng& rng, int trial) {
  const Seam seam = trial % 2 == 0 ? Seam::Wrap : Seam::Open;
  Tensor image = random_tensor(rng, 6, 8, 3, 0, 1);
  Tensor coords(6, 8, 2);
  // Keep probes at least 0.01 px away from grid lines, where the bilinear
  // weights have kinks.
  auto away_from_grid = [&](double lo, double hi) {
    double v;
    do {
      v = rng.uniform(lo, hi);
    } while (std::abs(v - std::round(v)) < 0.01);
    return v;
  };
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 8; ++c) {
      coords(r, c, 0) = away_from_grid(-2.0, 10.0);
      coords(r, c, 1) = away_from_grid(-0.4, 5.4);
    }
  const Tensor w = random_tensor(rng, 6, 8, 3, -1, 1);
  auto f = [&] { return dot(bilinear_sample(image, coords, seam).samples, w); };
  const SampleGrads g = bilinear_sample_backward(image, coords, seam, w);
  Prober p(res, f);
  p.probe_some(rng, image.values(), g.image.values());
  p.probe_some(rng, coords.values(), g.coords.values());
}

Pose6 random_pose(Rng& rng, double scale) {
  Pose6 p;
  for (int k = 0; k < 6; ++k) p[k] = rng.uniform(-scale, scale);
  return p;
}

void check_synth(GradCheckResult& res, Rng& rng, int) {
  const CylCamera cam = CylCamera::full(16, 8);
  const Tensor source = random_tensor(rng, 8, 16, 3, 0, 1);
  Tensor depth = random_tensor(rng, 8, 16, 1, 2, 5);
  Pose6 pose = random_pose(rng, 0.1);
  const Tensor w = random_tensor(rng, 8, 16, 3, -1, 1);
  auto f = [&] { return dot(synthesize_view(source, depth, pose, cam).projected, w); };
  const SynthResult fwd = synthesize_view(source, depth, pose, cam);
  const SynthGrads g = synthesize_view_backward(source, depth, pose, cam, fwd, w);
  Prober p(res, f);
  p.probe_some(rng, depth.values(), g.depth.values());
  for (int k = 0; k < 6; ++k) p.probe(pose[k], g.pose[k]);
}

void check_total_loss(GradCheckResult& res, Rng& rng, int trial) {
  const CylCamera cam = CylCamera::full(16, 8);
  LossConfig cfg;
  cfg.num_scales = 2;
  cfg.lambda_e = 0.2;
  cfg.smooth_mode = static_cast<SmoothMode>(trial % 3);
  cfg.wrap = trial % 6 < 3;
  const Tensor target = random_tensor(rng, 8, 16, 3, 0, 1);
  const std::vector<Tensor> sources{random_tensor(rng, 8, 16, 3, 0, 1), random_tensor(rng, 8, 16, 3, 0, 1)};
  std::vector<Tensor> disparity{random_tensor(rng, 8, 16, 1, 0.15, 0.5), random_tensor(rng, 4, 8, 1, 0.15, 0.5)};
  std::vector<Pose6> poses{random_pose(rng, 0.05), random_pose(rng, 0.05)};
  std::vector<std::vector<Tensor>> masks(2);
  for (auto& m : masks) m = {random_tensor(rng, 8, 16, 2, -1, 1), random_tensor(rng, 4, 8, 2, -1, 1)};
  auto f = [&] { return total_loss({&target, sources, cam, disparity, poses, masks}, cfg).total; };
  LossGradients g;
  total_loss({&target, sources, cam, disparity, poses, masks}, cfg, &g);
  Prober p(res, f);
  for (int s = 0; s < 2; ++s) p.probe_some(rng, disparity[s].values(), g.disparity[s].values());
  for (int k = 0; k < 2; ++k)
    for (int j = 0; j < 6; ++j) p.probe(poses[k][j], g.poses[k][j]);
  for (int k = 0; k < 2; ++k)
    for (int s = 0; s < 2; ++s) p.probe_some(rng, masks[k][s].values(), g.mask_logits[k][s].values());
}

NetSpec small_spec(int trial) {
  NetSpec spec;
  spec.depth_widths = {3, 4, 4};
  spec.pose_widths = {3, 4, 4};
  spec.num_scales = 2;
  spec.wrap = trial % 2 == 0;
  return spec;
}

void randomize(Model& m, Rng& rng) {
  for (double& v : m.params.all_values()) v = rng.uniform(-0.5, 0.5);
}

void check_depth_net(GradCheckResult& res, Rng& rng, int trial) {
  Model m(small_spec(trial));
  randomize(m, rng);
  const Tensor image = random_tensor(rng, 8, 16, 3, 0, 1);
  const std::vector<Tensor> w{random_tensor(rng, 8, 16, 1, -1, 1), random_tensor(rng, 4, 8, 1, -1, 1)};
  auto f = [&] {
    const auto out = m.depth.forward(m.params, image);
    return dot(out[0], w[0]) + dot(out[1], w[1]);
  };
  DepthNet::Cache cache;
  m.depth.forward(m.params, image, &cache);
  m.params.zero_grad();
  m.depth.backward(m.params, cache, w);
  const std::vector<double> grads = m.params.all_grads();
  Prober p(res, f);
  for (std::size_t e = 0; e < m.params.entries().size(); ++e) {
    if (m.params.entries()[e].name.rfind("depth.", 0) != 0) continue;
    const auto& entry = m.params.entries()[e];
    p.probe_some(rng, m.params.values(e), std::span<const double>(grads).subspan(entry.offset, entry.size));
  }
}

void check_pose_net(GradCheckResult& res, Rng& rng, int trial) {
  Model m(small_spec(trial));
  randomize(m, rng);
  const Tensor target = random_tensor(rng, 8, 16, 3, 0, 1);
  const std::vector<Tensor> sources{random_tensor(rng, 8, 16, 3, 0, 1), random_tensor(rng, 8, 16, 3, 0, 1)};
  std::vector<Pose6> wp{random_pose(rng, 1.0), random_pose(rng, 1.0)};
  std::vector<std::vector<Tensor>> wm(2);
  for (auto& v : wm) v = {random_tensor(rng, 8, 16, 2, -1, 1), random_tensor(rng, 4, 8, 2, -1, 1)};
  auto f = [&] {
    const PoseMaskOutput out = m.pose.forward(m.params, target, sources, true);
    double s = 0.0;
    for (int k = 0; k < 2; ++k) {
      for (int j = 0; j < 6; ++j) s += out.poses[k][j] * wp[k][j];
      for (int l = 0; l < 2; ++l) s += dot(out.mask_logits[k][l], wm[k][l]);
    }
    return s;
  };
  PoseMaskNet::Cache cache;
  m.pose.forward(m.params, target, sources, true, &cache);
  m.params.zero_grad();
  m.pose.backward(m.params, cache, wp, wm);
  const std::vector<double> grads = m.params.all_grads();
  Prober p(res, f);
  for (std::size_t e = 0; e < m.params.entries().size(); ++e) {
    const auto& entry = m.params.entries()[e];
    if (entry.name.rfind("pose.", 0) != 0 && entry.name.rfind("mask.", 0) != 0) continue;
    p.probe_some(rng, m.params.values(e), std::span<const double>(grads).subspan(entry.offset, entry.size));
  }
}

}  // namespace

std::string_view to_string(GradComponent c) noexcept {
  switch (c) {
    case GradComponent::Conv: return "conv";
    case GradComponent::Sampler: return "sampler";
    case GradComponent::Synth: return "synth";
    case GradComponent::TotalLoss: return "total_loss";
    case GradComponent::DepthNet: return "depth_net";
    case GradComponent::PoseNet: return "pose_net";
  }
  return "unknown";
}

GradComponent grad_component_from_string(std::string_view name) {
  for (GradComponent c : all_grad_components())
    if (to_string(c) == name) return c;
  throw Error(ErrorCode::BadArgument, "unknown gradient component " + std::string(name));
}

std::vector<GradComponent> all_grad_components() {
  return {GradComponent::Conv,      GradComponent::Sampler,  GradComponent::Synth,
          GradComponent::TotalLoss, GradComponent::DepthNet, GradComponent::PoseNet};
}

GradCheckResult gradient_check(GradComponent component, int trials, std::uint64_t seed) {
  require(trials >= 1, ErrorCode::BadArgument, "need at least one trial");
  GradCheckResult res;
  res.component = component;
  Rng rng(seed ^ (0x51ed270b27a1f3c5ULL * (static_cast<std::uint64_t>(component) + 1)));
  for (int t = 0; t < trials; ++t) {
    switch (component) {
      case GradComponent::Conv: check_conv(res, rng, t); break;
      case GradComponent::Sampler: check_sampler(res, rng, t); break;
      case GradComponent::Synth: check_synth(res, rng, t); break;
      case GradComponent::TotalLoss: check_total_loss(res, rng, t); break;
      case GradComponent::DepthNet: check_depth_net(res, rng, t); break;
      case GradComponent::PoseNet: check_pose_net(res, rng, t); break;
    }
  }
  return res;
}

}  // namespace cylsfm
