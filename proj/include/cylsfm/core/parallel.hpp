#pragma once

#include <cstddef>
#include <functional>

namespace cylsfm {

/// Worker count used by parallel loops (default 1).
void set_num_threads(int n);
int num_threads() noexcept;

/// Runs body(i) for i in [0, n). Iterations must write disjoint outputs;
/// the partition into contiguous blocks depends only on n and the thread
/// count, and no reduction happens across blocks.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace cylsfm
