#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace birchmax {

/// Runs body(worker, i) for i in [0, count) on up to `workers` threads.
///
/// Items are handed out dynamically, so callers must write results into
/// per-item slots; any reduction happens afterwards in index order, which
/// keeps outputs identical for every worker count.
template <class Body>
void parallel_for(std::size_t count, unsigned workers, Body&& body) {
  workers = std::max(1u, workers);
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(0u, i);
    return;
  }
  const unsigned n_threads = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&](unsigned worker) {
    try {
      for (std::size_t i = next++; i < count; i = next++) body(worker, i);
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = count;
    }
  };
  std::vector<std::jthread> threads;
  threads.reserve(n_threads - 1);
  for (unsigned w = 1; w < n_threads; ++w) threads.emplace_back(run, w);
  run(0);
  threads.clear();
  if (failure) std::rethrow_exception(failure);
}

inline unsigned default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace birchmax
