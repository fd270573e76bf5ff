#include "cylsfm/estimation/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "cylsfm/core/error.hpp"
#include "cylsfm/core/rng.hpp"

namespace cylsfm {

namespace {

std::vector<double> to_doubles(const std::vector<int>& v) { return {v.begin(), v.end()}; }

std::vector<int> to_ints(const std::vector<double>& v) {
  std::vector<int> out;
  for (double x : v) out.push_back(static_cast<int>(x));
  return out;
}

void check_loss_matches(const NetSpec& spec, const LossConfig& cfg) {
  cfg.validate();
  require(cfg.num_scales == spec.num_scales, ErrorCode::BadConfig, "loss num_scales must equal the network's");
  require(cfg.wrap == spec.wrap, ErrorCode::BadConfig, "loss and network must agree on seam wrapping");
}

NetSpec spec_from_checkpoint(const Checkpoint& ck) {
  NetSpec s;
  s.depth_widths = to_ints(ck.get("spec/depth_widths").data);
  s.pose_widths = to_ints(ck.get("spec/pose_widths").data);
  s.kernel = static_cast<int>(ck.scalar("spec/kernel"));
  s.num_scales = static_cast<int>(ck.scalar("spec/num_scales"));
  s.num_sources = static_cast<int>(ck.scalar("spec/num_sources"));
  s.wrap = ck.scalar("spec/wrap") != 0.0;
  s.bounds.d_min = ck.scalar("spec/d_min");
  s.bounds.d_max = ck.scalar("spec/d_max");
  s.validate();
  return s;
}

void load_params(ParamStore& store, const Checkpoint& ck) {
  for (std::size_t k = 0; k < store.entries().size(); ++k) {
    const auto& e = store.entries()[k];
    const auto& c = ck.get("param/" + e.name);
    require(c.data.size() == e.size, ErrorCode::Format, "checkpoint parameter has the wrong size: " + e.name);
    std::copy(c.data.begin(), c.data.end(), store.values(k).begin());
  }
}

}  // namespace

void TrainConfig::validate() const {
  require(steps >= 0, ErrorCode::BadConfig, "steps must be non-negative");
  require(lr > 0, ErrorCode::BadConfig, "learning rate must be positive");
  require(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1, ErrorCode::BadConfig, "moment coefficients must be in [0, 1)");
  require(batch_size >= 1, ErrorCode::BadConfig, "batch_size must be at least 1");
  require(checkpoint_every >= 0, ErrorCode::BadConfig, "checkpoint_every must be non-negative");
}

Tensor Prediction::depth() const { return reciprocal(disparity.at(0)); }

Prediction predict(const Model& model, const Snippet& snip, bool with_masks) {
  Prediction p;
  p.disparity = model.depth.forward(model.params, snip.target);
  p.pose = model.pose.forward(model.params, snip.target, snip.sources, with_masks);
  return p;
}

LossBreakdown model_loss(Model& model, const Snippet& snip, const LossConfig& cfg, bool accumulate_grads) {
  const bool masks = cfg.lambda_e > 0.0;
  DepthNet::Cache dc;
  PoseMaskNet::Cache pc;
  const auto disparity = model.depth.forward(model.params, snip.target, &dc);
  const auto pose = model.pose.forward(model.params, snip.target, snip.sources, masks, &pc);
  LossInputs in{&snip.target, snip.sources, snip.camera, disparity, pose.poses, pose.mask_logits};
  LossGradients g;
  const LossBreakdown loss = total_loss(in, cfg, accumulate_grads ? &g : nullptr);
  if (accumulate_grads) {
    model.depth.backward(model.params, dc, g.disparity);
    model.pose.backward(model.params, pc, g.poses, g.mask_logits);
  }
  return loss;
}

std::size_t snippet_for_step(std::uint64_t seed, std::int64_t draw, std::size_t count) {
  require(count > 0, ErrorCode::BadArgument, "empty data set");
  const auto epoch = static_cast<std::uint64_t>(draw) / count;
  Rng rng(seed ^ (0x9e3779b97f4a7c15ULL * (epoch + 1)));
  return rng.permutation(count)[static_cast<std::uint64_t>(draw) % count];
}

Trainer::Trainer(const NetSpec& spec, const TrainConfig& cfg, const LossConfig& loss_cfg)
    : cfg_(cfg), loss_cfg_(loss_cfg), model_(spec) {
  cfg.validate();
  check_loss_matches(spec, loss_cfg);
  model_.init(cfg.seed);
  opt_ = Adam(model_.params.all_values().size(), {cfg.lr, cfg.beta1, cfg.beta2});
}

Trainer::Trainer(const Checkpoint& ck, const TrainConfig& cfg, const LossConfig& loss_cfg)
    : cfg_(cfg), loss_cfg_(loss_cfg), model_(spec_from_checkpoint(ck)) {
  cfg.validate();
  check_loss_matches(model_.spec, loss_cfg);
  load_params(model_.params, ck);
  opt_ = Adam(model_.params.all_values().size(), {cfg.lr, cfg.beta1, cfg.beta2});
  const auto& m = ck.get("adam/m").data;
  const auto& v = ck.get("adam/v").data;
  require(m.size() == opt_.first_moment().size() && v.size() == m.size(), ErrorCode::Format,
          "optimizer state does not match the model");
  opt_.first_moment() = m;
  opt_.second_moment() = v;
  opt_.set_steps(static_cast<std::int64_t>(ck.scalar("adam/t")));
  step_ = static_cast<std::int64_t>(ck.scalar("train/step"));
  require(static_cast<int>(ck.scalar("train/batch_size")) == cfg.batch_size, ErrorCode::BadConfig,
          "batch_size differs from the checkpoint");
}

LossBreakdown Trainer::step(std::span<const Snippet> data) {
  model_.params.zero_grad();
  LossBreakdown loss;
  const int batch = cfg_.batch_size;
  for (int b = 0; b < batch; ++b) {
    const std::int64_t draw = step_ * batch + b;
    const LossBreakdown l = model_loss(model_, data[snippet_for_step(cfg_.seed, draw, data.size())], loss_cfg_, true);
    loss.total += l.total / batch;
    loss.pixel += l.pixel / batch;
    loss.smooth += l.smooth / batch;
    loss.exp += l.exp / batch;
  }
  if (!std::isfinite(loss.total)) throw Error(ErrorCode::Diverged, "training loss became non-finite");
  auto grads = model_.params.all_grads();
  if (batch > 1)
    for (double& g : grads) g /= batch;
  opt_.step(model_.params.all_values(), grads);
  for (double v : model_.params.all_values())
    if (!std::isfinite(v)) throw Error(ErrorCode::Diverged, "non-finite network parameter");
  ++step_;
  return loss;
}

std::vector<LossBreakdown> Trainer::run(std::span<const Snippet> data) {
  require(!data.empty(), ErrorCode::BadArgument, "training set is empty");
  for (const auto& s : data) s.validate();
  std::ofstream log;
  if (!cfg_.log_path.empty()) {
    log.open(cfg_.log_path, step_ > 0 ? std::ios::app : std::ios::trunc);
    require(static_cast<bool>(log), ErrorCode::Io, "cannot open " + cfg_.log_path.string());
  }
  std::vector<LossBreakdown> trace;
  char line[256];
  while (step_ < cfg_.steps) {
    const LossBreakdown loss = step(data);
    trace.push_back(loss);
    if (log.is_open()) {
      std::snprintf(line, sizeof line, "step=%lld total=%.17g pixel=%.17g smooth=%.17g exp=%.17g\n",
                    static_cast<long long>(step_), loss.total, loss.pixel, loss.smooth, loss.exp);
      log << line;
    }
    if (!cfg_.checkpoint_path.empty() && cfg_.checkpoint_every > 0 && step_ % cfg_.checkpoint_every == 0)
      checkpoint().save(cfg_.checkpoint_path);
  }
  if (!cfg_.checkpoint_path.empty()) checkpoint().save(cfg_.checkpoint_path);
  return trace;
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint ck;
  const NetSpec& s = model_.spec;
  ck.put("spec/depth_widths", {s.depth_widths.size()}, to_doubles(s.depth_widths));
  ck.put("spec/pose_widths", {s.pose_widths.size()}, to_doubles(s.pose_widths));
  ck.put_scalar("spec/kernel", s.kernel);
  ck.put_scalar("spec/num_scales", s.num_scales);
  ck.put_scalar("spec/num_sources", s.num_sources);
  ck.put_scalar("spec/wrap", s.wrap ? 1.0 : 0.0);
  ck.put_scalar("spec/d_min", s.bounds.d_min);
  ck.put_scalar("spec/d_max", s.bounds.d_max);
  ck.put_scalar("loss/lambda_s", loss_cfg_.lambda_s);
  ck.put_scalar("loss/lambda_e", loss_cfg_.lambda_e);
  ck.put_scalar("loss/lambda_m", loss_cfg_.lambda_m);
  ck.put_scalar("loss/smooth_mode", static_cast<double>(loss_cfg_.smooth_mode));
  ck.put_scalar("train/lr", cfg_.lr);
  ck.put_scalar("train/batch_size", cfg_.batch_size);
  ck.put_scalar("train/seed_lo", static_cast<double>(cfg_.seed & 0xffffffffULL));
  ck.put_scalar("train/seed_hi", static_cast<double>(cfg_.seed >> 32));
  ck.put_scalar("train/step", static_cast<double>(step_));
  for (std::size_t k = 0; k < model_.params.entries().size(); ++k) {
    const auto& e = model_.params.entries()[k];
    std::vector<std::uint64_t> dims(e.dims.begin(), e.dims.end());
    const auto v = model_.params.values(k);
    ck.put("param/" + e.name, dims, {v.begin(), v.end()});
  }
  const auto n = static_cast<std::uint64_t>(opt_.first_moment().size());
  ck.put("adam/m", {n}, opt_.first_moment());
  ck.put("adam/v", {n}, opt_.second_moment());
  ck.put_scalar("adam/t", static_cast<double>(opt_.steps()));
  return ck;
}

Model model_from_checkpoint(const Checkpoint& ck) {
  Model m(spec_from_checkpoint(ck));
  load_params(m.params, ck);
  return m;
}

}  // namespace cylsfm
