#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace plma {

// Number of worker threads used when a caller passes workers <= 0.
int default_workers();
void set_default_workers(int workers);

// Runs body(i) for i in [0, count) on up to `workers` threads. Indices are
// dealt out in contiguous blocks, so body must only write to slot i of any
// shared output. The first exception thrown by a body is rethrown.
template <class Body>
void parallel_for(std::size_t count, int workers, Body&& body) {
  if (workers <= 0) workers = default_workers();
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
  if (w <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(w);
  for (std::size_t t = 0; t < w; ++t) {
    const std::size_t lo = count * t / w;
    const std::size_t hi = count * (t + 1) / w;
    threads.emplace_back([&, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace plma
