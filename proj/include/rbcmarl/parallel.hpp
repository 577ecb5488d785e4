#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rbcmarl {

// Runs fn(k) for k in [0, n) on up to `workers` threads, each owning one
// contiguous block of indices. Results must be written to per-index slots;
// any reduction happens afterwards in index order so the outcome does not
// depend on the worker count.
template <typename Fn>
void parallel_for(int n, int workers, Fn&& fn) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int k = 0; k < n; ++k) fn(k);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      const int begin = static_cast<int>(static_cast<long long>(n) * w / workers);
      const int end = static_cast<int>(static_cast<long long>(n) * (w + 1) / workers);
      pool.emplace_back([&, begin, end] {
        try {
          for (int k = begin; k < end; ++k) fn(k);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace rbcmarl
