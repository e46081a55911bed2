#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace rqwalk {

// Process-wide worker count for parallel_for; 1 means run inline.
void set_worker_threads(int n);
int worker_threads();

// Runs body(i) for i in [0, n).  Tasks must be pure functions of their index
// (plus captured read-only state) writing only to per-index slots, so results
// are identical for any worker count.  The lowest-index exception wins.
template <typename F>
void parallel_for(std::size_t n, F&& body) {
  int threads = worker_threads();
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_err;
  std::size_t first_err_index = n;
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (i < first_err_index) {
          first_err_index = i;
          first_err = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  pool.reserve(count);
  for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_err) std::rethrow_exception(first_err);
}

}  // namespace rqwalk
