#pragma once

// Deterministic shared-memory parallel helpers.  Work is split into
// fixed-size chunks independent of the worker count; reductions keep one
// partial per chunk and merge them in chunk order, so results are
// bit-identical for any number of workers.

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace so3prop {

inline constexpr std::size_t kParallelChunk = 4096;

inline int resolve_workers(int workers) {
  if (workers > 0) return workers;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

/// fn(begin, end) over [0,n) in chunks; chunk assignment is dynamic but the
/// work done per index is independent, so output is worker-count invariant.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  const int nw = resolve_workers(workers);
  const std::size_t nchunks = (n + kParallelChunk - 1) / kParallelChunk;
  if (nw <= 1 || nchunks <= 1) {
    // Same chunk boundaries as the threaded path so reductions associate
    // identically for every worker count.
    for (std::size_t c = 0; c < nchunks; ++c) {
      fn(c * kParallelChunk, std::min(n, (c + 1) * kParallelChunk));
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= nchunks) return;
      const std::size_t b = c * kParallelChunk;
      const std::size_t e = std::min(n, b + kParallelChunk);
      fn(b, e);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nw);
  for (int i = 0; i < nw; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

/// Sum of fn(i) over [0,n).  Each chunk is accumulated sequentially into its
/// own slot; slots are merged in index order.
template <typename Fn>
double parallel_sum(std::size_t n, int workers, Fn&& fn) {
  const std::size_t nchunks = (n + kParallelChunk - 1) / kParallelChunk;
  std::vector<double> partial(nchunks, 0.0);
  parallel_for(n, workers, [&](std::size_t b, std::size_t e) {
    double acc = 0.0;
    for (std::size_t i = b; i < e; ++i) acc += fn(i);
    partial[b / kParallelChunk] = acc;
  });
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

}  // namespace so3prop
