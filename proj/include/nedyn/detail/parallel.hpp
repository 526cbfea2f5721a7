#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace nedyn::detail {

/// Thread count for amplitude kernels, read once from NEDYN_THREADS.
/// Unset, empty or unparsable means 1.
inline unsigned kernel_threads() {
  static const unsigned count = [] {
    const char* env = std::getenv("NEDYN_THREADS");
    if (env == nullptr || *env == '\0') return 1u;
    try {
      const long v = std::stol(env);
      return v < 1 ? 1u : static_cast<unsigned>(std::min<long>(v, 256));
    } catch (...) {
      return 1u;
    }
  }();
  return count;
}

/// Below this many work items the kernels always run inline.
inline constexpr std::size_t kParallelThreshold = std::size_t{1} << 15;

/// Calls fn(begin, end) over disjoint chunks of [0, count). Chunks never
/// overlap, so kernels that write only their own indices stay deterministic.
template <class Fn>
void parallel_chunks(std::size_t count, Fn&& fn) {
  const unsigned threads = kernel_threads();
  if (threads <= 1 || count < kParallelThreshold) {
    fn(std::size_t{0}, count);
    return;
  }
  const std::size_t chunk = (count + threads - 1) / threads;
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    workers.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
}

}  // namespace nedyn::detail
