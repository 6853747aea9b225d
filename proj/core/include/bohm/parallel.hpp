#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace bohm {

/// Process-wide worker count used by data-parallel loops. Defaults to 1.
void set_thread_count(std::size_t n);
std::size_t thread_count() noexcept;

/// Runs body(i) for i in [begin, end). The range is split into contiguous,
/// statically assigned chunks, so results never depend on the thread count as
/// long as body(i) writes only to slot i.
template <class Body>
void parallel_for(std::size_t begin, std::size_t end, Body&& body, std::size_t grain = 4096) {
  const std::size_t n = end > begin ? end - begin : 0;
  const std::size_t workers = std::min(thread_count(), n / std::max<std::size_t>(grain, 1));
  if (workers <= 1) {
    for (std::size_t i = begin; i < end; ++i) body(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t lo = begin + w * chunk;
    const std::size_t hi = std::min(end, lo + chunk);
    pool.emplace_back([lo, hi, &body] {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (std::size_t i = begin; i < std::min(end, begin + chunk); ++i) body(i);
}

}  // namespace bohm
