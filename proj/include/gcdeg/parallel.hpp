#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gcdeg {

/// Worker count: GCDEG_THREADS when set (>= 1), else hardware concurrency.
inline unsigned thread_count() {
  if (const char* env = std::getenv("GCDEG_THREADS")) {
    long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<unsigned>(std::min<long>(n, 256));
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

namespace detail {
inline thread_local bool in_parallel_region = false;
}

/// Runs f(i) for i in [0, n). Work is claimed dynamically; callers write
/// into per-index slots and reduce in index order, so results do not depend
/// on the thread count. The first exception (lowest index) is rethrown.
/// Nested calls run serially.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), n));
  if (workers <= 1 || detail::in_parallel_region) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr error;
  std::size_t error_index = n;
  auto run = [&] {
    const bool outer = detail::in_parallel_region;
    detail::in_parallel_region = true;
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) break;
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
    detail::in_parallel_region = outer;
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace gcdeg
