#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace kscube {

/// Runs body(chunk) for chunk in [0, chunks) on up to `threads` workers.
/// Chunks are assigned statically; callers store per-chunk results by index
/// and reduce them in chunk order, which keeps results independent of the
/// thread count.
inline void parallel_chunks(std::size_t chunks, int threads,
                            const std::function<void(std::size_t)>& body) {
  std::size_t workers = static_cast<std::size_t>(std::max(1, threads));
  workers = std::min(workers, chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) body(c);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([w, workers, chunks, &body] {
      for (std::size_t c = w; c < chunks; c += workers) body(c);
    });
  }
}

}  // namespace kscube
