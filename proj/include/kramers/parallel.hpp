#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <stop_token>
#include <thread>
#include <vector>

namespace kramers {

// Runs fn(i) for i in [0, n) on `jobs` threads, chunked through an atomic cursor. The first
// exception stops the remaining work and is rethrown. Returns the number of indices run, which
// is below n only when stop was requested.
template <class Fn>
std::int64_t parallel_for(std::int64_t n, int jobs, Fn&& fn, std::stop_token stop = {}) {
  jobs = std::max(1, jobs);
  std::atomic<std::int64_t> cursor{0}, done{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  const std::int64_t chunk = std::max<std::int64_t>(1, n / (64 * jobs));
  auto worker = [&] {
    while (!failed.load() && !stop.stop_requested()) {
      const std::int64_t begin = cursor.fetch_add(chunk);
      if (begin >= n) return;
      const std::int64_t end = std::min(n, begin + chunk);
      try {
        for (std::int64_t i = begin; i < end; ++i) fn(i);
        done += end - begin;
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  if (jobs == 1 || n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  return done.load();
}

}  // namespace kramers
