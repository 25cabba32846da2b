#pragma once

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qobs::detail {

/// Compensated (Neumaier) running sum.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (!std::isfinite(t)) {
      sum = t;
      return;
    }
    if (std::abs(sum) >= std::abs(x))
      carry += (sum - t) + x;
    else
      carry += (x - t) + sum;
    sum = t;
  }
  double value() const { return std::isfinite(sum) ? sum + carry : sum; }
};

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Calls body(i) for i in [begin, end), split into contiguous chunks. Each index is
/// processed by exactly one thread, so per-index outputs are independent of the split.
template <class Body>
void parallel_for(int begin, int end, int threads, Body&& body) {
  const int count = end - begin;
  if (count <= 0) return;
  const int workers = std::min(threads, count);
  if (workers <= 1) {
    for (int i = begin; i < end; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const int lo = begin + static_cast<int>(static_cast<long long>(count) * w / workers);
    const int hi = begin + static_cast<int>(static_cast<long long>(count) * (w + 1) / workers);
    pool.emplace_back([&, lo, hi] {
      try {
        for (int i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace qobs::detail
