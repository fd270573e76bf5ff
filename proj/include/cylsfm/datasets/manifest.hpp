#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cylsfm/camera/cylinder.hpp"
#include "cylsfm/estimation/snippet.hpp"
#include "cylsfm/synthesis/pose.hpp"

namespace cylsfm {

enum class Split { Train, Val, Test };

std::string_view to_string(Split s) noexcept;
Split split_from_string(std::string_view name);

/// Paths are relative to the manifest's directory; depth may be empty.
struct FrameRecord {
  std::string color;
  std::string depth;
  std::optional<Pose6> pose;  // camera to world
};

struct SnippetRecord {
  std::array<int, 3> frames{};  // previous, target, next
  Split split = Split::Train;
};

struct SplitFractions {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

/// Whether static frames were removed; footage without poses cannot be
/// filtered and says so.
enum class StaticFilter { Applied, SkippedNoPoses, Disabled };

struct SequenceManifest {
  CylCamera camera;
  StaticFilter static_filter = StaticFilter::Disabled;
  double static_tau = 0.0;
  std::vector<FrameRecord> frames;
  std::vector<SnippetRecord> snippets;

  /// Throws BadArgument for out-of-range or non-consecutive snippets, or when
  /// a test snippet shares a frame with a training one.
  void validate() const;
  std::vector<int> snippets_in(Split split) const;

  void save(const std::filesystem::path& path) const;
  static SequenceManifest load(const std::filesystem::path& path);
};

/// Consecutive triples (k-1, k, k+1). Runs of `chunk` consecutive triples are
/// shuffled with the seed and dealt to the splits by fraction; test triples
/// that share a frame with a training triple are then dropped.
std::vector<SnippetRecord> make_sequences(int frame_count, const SplitFractions& fractions, std::uint64_t seed,
                                          int chunk = 10);

/// Pose taking target-camera coordinates to source-camera ones.
Pose6 relative_frame_pose(const Pose6& target_world, const Pose6& source_world);

/// Reads snippet `index` of a manifest stored in `dir`. Ground truth is
/// filled in when the files carry it.
Snippet load_snippet(const SequenceManifest& m, const std::filesystem::path& dir, int index);

}  // namespace cylsfm
