#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace cylsfm {

struct CheckpointEntry {
  std::string name;
  std::vector<std::uint64_t> dims;
  std::vector<double> data;
};

/// Named float64 arrays. On disk:
///   "CYLSFMCK" | u32 version | u64 entry count |
///   per entry: u32 name length, name bytes, u32 rank, u64 dims[rank],
///              f64 payload[prod(dims)]
/// with every integer and float little-endian.
struct Checkpoint {
  std::vector<CheckpointEntry> entries;

  void put(const std::string& name, std::vector<std::uint64_t> dims, std::vector<double> data);
  void put_scalar(const std::string& name, double v) { put(name, {}, {v}); }
  const CheckpointEntry& get(const std::string& name) const;  // throws Format
  bool has(const std::string& name) const;
  double scalar(const std::string& name) const;

  /// Writes to a sibling temporary file and renames it into place.
  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

  bool operator==(const Checkpoint&) const;
};

}  // namespace cylsfm
