#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "tailcluster/random.hpp"

namespace tailcluster {

struct ParallelOptions {
  unsigned threads = 1;
  std::size_t chunk_size = 1024;
};

/// Runs fn(index, stream, acc) for index in [0, n) with stream = (seed, index).
///
/// Indices are grouped into fixed chunks, each accumulated sequentially into
/// its own Acc, and the chunk accumulators are merged in chunk order. The
/// result is therefore bit-identical for any thread count. The first
/// exception thrown by a worker is rethrown on the calling thread.
template <class Acc, class Fn>
Acc run_chunked(std::uint64_t seed, std::size_t n, const ParallelOptions& options, Fn&& fn, Acc prototype = Acc{}) {
  const std::size_t chunk = std::max<std::size_t>(options.chunk_size, 1);
  const std::size_t chunks = (n + chunk - 1) / chunk;
  std::vector<Acc> partial(chunks, prototype);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::atomic<bool> stop{false};

  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks || stop.load()) return;
      try {
        const std::size_t end = std::min(n, (c + 1) * chunk);
        for (std::size_t i = c * chunk; i < end; ++i) {
          RandomStream stream(seed, i);
          fn(i, stream, partial[c]);
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        stop.store(true);
        return;
      }
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(std::max<std::size_t>(chunks, 1))));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  Acc total = prototype;
  for (const Acc& p : partial) total.merge(p);
  return total;
}

}  // namespace tailcluster
