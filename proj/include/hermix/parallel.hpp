#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace hermix {

inline constexpr std::size_t kReductionChunk = 4096;

/// Worker count: HERMIX_THREADS if set and positive, else hardware concurrency.
inline unsigned thread_count() {
  if (const char* env = std::getenv("HERMIX_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

/// Runs task(i) for i in [0, count) across worker threads. Tasks must write
/// to disjoint outputs; ordering of side effects is unspecified.
template <class Task>
void parallel_for(std::size_t count, const Task& task) {
  const unsigned workers = std::min<std::size_t>(thread_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) task(i);
    });
  for (auto& t : pool) t.join();
}

/// Sums per-chunk partial vectors in chunk order, so the result does not
/// depend on the worker count. chunk_sum(begin, end, out) accumulates into out.
template <class ChunkSum>
std::vector<double> chunked_sum(std::size_t n, std::size_t width, const ChunkSum& chunk_sum) {
  const std::size_t chunks = (n + kReductionChunk - 1) / kReductionChunk;
  std::vector<std::vector<double>> partial(chunks, std::vector<double>(width, 0.0));
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t begin = c * kReductionChunk;
    chunk_sum(begin, std::min(n, begin + kReductionChunk), partial[c]);
  });
  std::vector<double> total(width, 0.0);
  for (const auto& p : partial)
    for (std::size_t k = 0; k < width; ++k) total[k] += p[k];
  return total;
}

}  // namespace hermix
