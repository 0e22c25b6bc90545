#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "prmrl/errors.hpp"

namespace prmrl {

/// 0 maps to the hardware concurrency.
inline int resolve_workers(int workers) {
  if (workers < 0) throw PreconditionError("worker count must be >= 0");
  if (workers == 0) return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return workers;
}

/// Runs task(i) for every i in [0, n) on up to `workers` threads. Tasks must
/// write to per-index slots so scheduling order never shows in the result.
/// The first exception stops new tasks and is rethrown.
template <typename Task>
void parallel_for(std::size_t n, int workers, Task&& task) {
  const auto w = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), std::max<std::size_t>(n, 1));
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (std::size_t t = 0; t < w; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(n);
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace prmrl
