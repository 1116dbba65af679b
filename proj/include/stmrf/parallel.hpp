#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace stmrf {

/// Runs fn(begin, end) over contiguous chunks of [0, n) on up to `threads`
/// workers. Chunk boundaries depend only on n and threads, and callers must
/// write disjoint output regions, so results are thread-count independent.
inline void parallel_chunks(std::size_t n, int threads,
                            const std::function<void(std::size_t, std::size_t)>& fn) {
  if (threads <= 1 || n < 2) {
    fn(0, n);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace stmrf
