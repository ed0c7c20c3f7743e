#pragma once

#include <algorithm>
#include <cstddef>
#include <future>
#include <thread>
#include <vector>

namespace laa {

/// Runs f(k) for k in [0, n) on up to `max_threads` workers (0: hardware
/// concurrency). Each worker takes a strided slice; joins happen in worker
/// order so the first exception thrown by the lowest worker propagates.
/// f must only write to per-k slots.
template <class F>
void parallel_for(std::size_t n, F&& f, std::size_t max_threads = 0) {
  std::size_t workers = max_threads ? max_threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t k = 0; k < n; ++k) f(k);
    return;
  }
  std::vector<std::future<void>> tasks;
  tasks.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    tasks.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t k = w; k < n; k += workers) f(k);
    }));
  }
  for (auto& t : tasks) t.wait();
  for (auto& t : tasks) t.get();
}

}  // namespace laa
