#pragma once

#include <cstdint>

// Records which side of every non-smooth point (absolute value, rectifier,
// bilinear cell, clamp) a computation took. Finite-difference checks use the
// hash to reject probes whose +h and -h evaluations fall on different pieces
// of a piecewise-smooth function.
namespace cylsfm::branch_trace {

struct State {
  bool enabled = false;
  std::uint64_t hash = 0;
};

inline thread_local State tls_state;

inline void note(std::uint64_t branch) {
  State& s = tls_state;
  if (!s.enabled) return;
  std::uint64_t x = s.hash ^ (branch + 0x9e3779b97f4a7c15ULL);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  s.hash = x;
}

/// Enables tracing for the current thread while alive.
class Scope {
 public:
  Scope() : saved_(tls_state) { tls_state = State{true, 0}; }
  ~Scope() { tls_state = saved_; }
  Scope(const Scope&) = delete;
  Scope& operator=(const Scope&) = delete;

  std::uint64_t hash() const { return tls_state.hash; }

 private:
  State saved_;
};

}  // namespace cylsfm::branch_trace
