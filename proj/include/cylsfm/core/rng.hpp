#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace cylsfm {

/// Seeded random source with platform-independent sampling.
///
/// The standard distributions are implementation-defined, so outputs would
/// differ between standard libraries. Everything here is derived directly
/// from the raw 64-bit Mersenne Twister stream, which is fully specified.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (no cached second value, so the stream
  /// position is a pure function of the call count).
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t index(std::uint64_t n);

  /// Fisher-Yates shuffle of [0, n).
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace cylsfm
