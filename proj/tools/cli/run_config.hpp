#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cylsfm/camera/cylinder.hpp"
#include "cylsfm/datasets/manifest.hpp"
#include "cylsfm/datasets/synthetic.hpp"
#include "cylsfm/estimation/direct.hpp"
#include "cylsfm/estimation/nets.hpp"
#include "cylsfm/estimation/train.hpp"
#include "cylsfm/synthesis/losses.hpp"

namespace cylsfm::cli {

enum class InputKind { Cylindrical, Cube, Equirect };

/// Every setting a subcommand may read. Keys are "section.name"; see
/// RunConfig::keys() for the full list with defaults.
struct RunConfig {
  int camera_width = 128;
  int camera_height = 32;
  double camera_h_max = 0.0;  // 0: square pixels, pi * H / W

  LossConfig loss;
  DepthBounds bounds;
  OptimConfig optim;

  std::vector<int> net_depth_widths{8, 16, 32, 32, 32};
  std::vector<int> net_pose_widths{8, 16, 32, 32, 32};
  int net_kernel = 3;

  int train_steps = 2000;
  double train_lr = 2e-4;
  int train_batch_size = 1;
  double train_beta1 = 0.9;
  double train_beta2 = 0.999;
  int train_checkpoint_every = 0;

  InputKind prepare_kind = InputKind::Cylindrical;
  bool prepare_static_filter = true;
  double prepare_static_tau = 0.05;
  SplitFractions prepare_split;
  int prepare_chunk = 10;
  double prepare_face_fov = 100.0;

  SequenceConfig synthetic;
  int synthetic_face_size = 128;
  int synthetic_equirect_width = 512;

  std::uint64_t seed = 0;
  int threads = 1;

  struct Key {
    std::string name;
    std::string doc;
  };
  static const std::vector<Key>& keys();

  /// Throws BadConfig for an unknown key or an unparsable value.
  void set(std::string_view key, std::string_view value);
  std::string get(std::string_view key) const;
  /// "key = value" lines in keys() order.
  std::string dump() const;

  CylCamera camera() const;
  NetSpec net_spec() const;
  TrainConfig train_config() const;
  OptimConfig optim_config() const;  // bounds and seed filled in
};

/// Defaults, then the file's "key = value" lines (# starts a comment), then
/// each "key=value" override in order.
RunConfig load_run_config(const std::filesystem::path& file, const std::vector<std::string>& overrides);

}  // namespace cylsfm::cli
