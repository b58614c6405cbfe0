#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace gleam {

/// Worker count from GLEAM_THREADS, falling back to the hardware concurrency.
inline unsigned default_worker_count() {
  if (const char* env = std::getenv("GLEAM_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n) on up to `workers` threads using static
/// contiguous chunks. Tasks must write only to state owned by index i.
/// If several tasks throw, the exception from the lowest index is rethrown so
/// failures are reported identically for every worker count.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  if (n == 0) return;
  const std::size_t nthreads = std::min<std::size_t>(std::max(1u, workers), n);
  if (nthreads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(nthreads);
  std::vector<std::size_t> error_index(nthreads, n);
  {
    std::vector<std::jthread> pool;
    pool.reserve(nthreads);
    const std::size_t chunk = (n + nthreads - 1) / nthreads;
    for (std::size_t t = 0; t < nthreads; ++t) {
      const std::size_t lo = t * chunk;
      const std::size_t hi = std::min(n, lo + chunk);
      pool.emplace_back([&, t, lo, hi] {
        for (std::size_t i = lo; i < hi; ++i) {
          try {
            fn(i);
          } catch (...) {
            errors[t] = std::current_exception();
            error_index[t] = i;
            return;
          }
        }
      });
    }
  }
  std::size_t first = n;
  std::exception_ptr err;
  for (std::size_t t = 0; t < nthreads; ++t) {
    if (errors[t] && error_index[t] < first) {
      first = error_index[t];
      err = errors[t];
    }
  }
  if (err) std::rethrow_exception(err);
}

}  // namespace gleam
