#pragma once

#include <atomic>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace qmetro {

/// Run fn(0..n-1) on up to `workers` threads. Tasks must be independent;
/// results keyed by index are identical to a serial run.
inline void parallel_for(int n, int workers,
                         const std::function<void(int)>& fn) {
  if (n <= 0) return;
  if (workers <= 1 || n == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int n_threads = std::min(workers, n);
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  std::exception_ptr error;
  std::mutex error_mu;
  for (int t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace qmetro
