#pragma once

#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace fluctlab {

// Runs fn(replica_index) for indices 0..n-1 over a worker pool. Results are
// stored by index, so the reduction order never depends on the thread count.
template <typename T, typename Fn>
std::vector<T> run_replicas(int n, int threads, Fn&& fn) {
  std::vector<T> results(static_cast<std::size_t>(n));
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  threads = std::min(threads, n);

  if (threads == 1) {
    for (int i = 0; i < n; ++i) results[static_cast<std::size_t>(i)] = fn(i);
    return results;
  }

  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          results[static_cast<std::size_t>(i)] = fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return results;
}

}  // namespace fluctlab
