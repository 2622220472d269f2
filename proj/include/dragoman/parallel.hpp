#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace dragoman {

/// Runs body(i) for i in [0, n) over `workers` threads using contiguous
/// chunks. Results must be written to pre-sized, index-addressed storage so
/// that output never depends on the worker count. If several chunks throw,
/// the exception from the lowest chunk is rethrown.
template <typename Body>
void parallel_for(std::size_t n, unsigned workers, Body&& body) {
  workers = std::max(1u, workers);
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const std::size_t chunks = std::min<std::size_t>(workers, n);
  const std::size_t step = (n + chunks - 1) / chunks;
  std::vector<std::exception_ptr> errors(chunks);
  {
    std::vector<std::jthread> threads;
    threads.reserve(chunks);
    for (std::size_t c = 0; c < chunks; ++c) {
      threads.emplace_back([&, c] {
        const std::size_t begin = c * step;
        const std::size_t end = std::min(n, begin + step);
        try {
          for (std::size_t i = begin; i < end; ++i) body(i);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace dragoman
