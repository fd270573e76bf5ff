#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cylsfm/estimation/adam.hpp"
#include "cylsfm/estimation/checkpoint.hpp"
#include "cylsfm/estimation/nets.hpp"
#include "cylsfm/estimation/snippet.hpp"
#include "cylsfm/synthesis/losses.hpp"

namespace cylsfm {

struct TrainConfig {
  int steps = 2000;  // total, including steps restored from a checkpoint
  double lr = 2e-4;
  int batch_size = 1;  // snippets whose gradients are averaged per step
  double beta1 = 0.9;
  double beta2 = 0.999;
  std::uint64_t seed = 0;
  int checkpoint_every = 0;             // 0: only at the end
  std::filesystem::path checkpoint_path;  // empty: never written
  std::filesystem::path log_path;         // empty: no metrics log

  void validate() const;
};

/// Network outputs for one snippet.
struct Prediction {
  std::vector<Tensor> disparity;  // finest first
  PoseMaskOutput pose;
  Tensor depth() const;  // 1 / disparity[0]
};

Prediction predict(const Model& model, const Snippet& snip, bool with_masks = false);

/// Loss of the model's prediction on one snippet; with grads non-null the
/// parameter gradients are accumulated into model.params.
LossBreakdown model_loss(Model& model, const Snippet& snip, const LossConfig& cfg, bool accumulate_grads);

/// Snippet visited at a given draw (step * batch_size + slot): a seeded
/// permutation of the data set per epoch, so the order depends only on the
/// seed and the draw index.
std::size_t snippet_for_step(std::uint64_t seed, std::int64_t draw, std::size_t count);

/// Adam training of both networks, batch_size snippets per step.
class Trainer {
 public:
  Trainer(const NetSpec& spec, const TrainConfig& cfg, const LossConfig& loss_cfg);
  /// Resumes model, optimizer state and step counter.
  Trainer(const Checkpoint& ck, const TrainConfig& cfg, const LossConfig& loss_cfg);

  LossBreakdown step(std::span<const Snippet> data);
  /// Steps until cfg.steps, appending one log line per step and writing
  /// checkpoints as configured. Returns the losses of the steps it ran.
  std::vector<LossBreakdown> run(std::span<const Snippet> data);

  Checkpoint checkpoint() const;
  const Model& model() const noexcept { return model_; }
  std::int64_t steps_done() const noexcept { return step_; }

 private:
  TrainConfig cfg_;
  LossConfig loss_cfg_;
  Model model_;
  Adam opt_;
  std::int64_t step_ = 0;
};

/// Rebuilds a model (spec and weights) from a checkpoint.
Model model_from_checkpoint(const Checkpoint& ck);

}  // namespace cylsfm
