// parallel.hpp: tiny fork-join helper. Worker count follows the hardware but
// is capped by the SPINFRIDGE_THREADS environment variable.
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace spinfridge {

[[nodiscard]] inline int worker_count(std::size_t tasks) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0)
    hw = 1;
  std::size_t workers = std::min<std::size_t>(hw, std::max<std::size_t>(tasks, 1));
  if (const char* env = std::getenv("SPINFRIDGE_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1)
      workers = std::min<std::size_t>(workers, static_cast<std::size_t>(cap));
  }
  return static_cast<int>(std::max<std::size_t>(workers, 1));
}

// Runs fn(i) for i in [0, n), splitting the range into contiguous blocks.
// Callers must write results into disjoint pre-sized storage so that the
// partitioning (and hence the worker count) never shows in the output.
// force_workers > 0 bypasses the automatic count (used by tests).
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, int force_workers = 0) {
  const int workers = force_workers > 0 ? force_workers : worker_count(n);
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i)
      fn(i);
    return;
  }
  const std::size_t chunk = (n + static_cast<std::size_t>(workers) - 1) / workers;
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    const std::size_t lo = static_cast<std::size_t>(w) * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi)
      break;
    pool.emplace_back([&fn, &errors, w, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i)
          fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool)
    t.join();
  for (const auto& err : errors)
    if (err)
      std::rethrow_exception(err);
}

} // namespace spinfridge
