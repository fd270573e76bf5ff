#include "cylsfm/core/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cylsfm {

namespace {
std::atomic<int> g_threads{1};
}

void set_num_threads(int n) { g_threads.store(std::max(1, n)); }

int num_threads() noexcept { return g_threads.load(); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const auto workers = static_cast<std::size_t>(num_threads());
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const std::size_t blocks = std::min(workers, n);
  std::vector<std::thread> pool;
  pool.reserve(blocks);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t lo = n * b / blocks;
    const std::size_t hi = n * (b + 1) / blocks;
    pool.emplace_back([lo, hi, &body, &first_error, &error_mutex] {
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        const std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace cylsfm
