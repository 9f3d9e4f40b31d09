#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace netmimo::detail {

// fn(i) for i in [0, n), statically partitioned across workers. Callers
// write results to disjoint, index-addressed slots; the join makes them
// visible, so reductions done afterwards in index order are deterministic
// for any worker count. The first exception thrown by a worker is rethrown.
inline void parallel_for(std::int64_t n, int workers, const std::function<void(std::int64_t)>& fn) {
  if (n <= 0) return;
  std::int64_t w = std::clamp<std::int64_t>(workers, 1, n);
  if (w == 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(w));
  const std::int64_t chunk = (n + w - 1) / w;
  for (std::int64_t t = 0; t < w; ++t) {
    const std::int64_t lo = t * chunk;
    const std::int64_t hi = std::min(n, lo + chunk);
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::int64_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> g(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace netmimo::detail
