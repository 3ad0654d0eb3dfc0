#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace kdee {

namespace detail {
inline std::atomic<unsigned>& thread_cap() {
  static std::atomic<unsigned> cap{0};  // 0 = use hardware_concurrency
  return cap;
}
inline thread_local bool in_parallel_region = false;
}  // namespace detail

inline void set_max_threads(unsigned n) { detail::thread_cap().store(n); }

inline unsigned max_threads() {
  unsigned cap = detail::thread_cap().load();
  if (cap == 0) cap = std::max(1u, std::thread::hardware_concurrency());
  return std::max(1u, cap);
}

// Runs fn(begin, end) over contiguous chunks of [0, n). The chunk partition is
// a pure function of (n, thread count requested) and each index is handled by
// exactly one chunk, so results are identical for any thread count as long as
// chunks do not share mutable state. Nested calls run sequentially.
template <typename Fn>
void parallel_for_chunks(std::size_t n, Fn&& fn) {
  if (n == 0) return;
  unsigned threads = max_threads();
  if (detail::in_parallel_region || threads <= 1 || n == 1) {
    fn(std::size_t{0}, n);
    return;
  }
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  auto run = [&fn](std::size_t b, std::size_t e) {
    detail::in_parallel_region = true;
    fn(b, e);
    detail::in_parallel_region = false;
  };
  for (unsigned t = 1; t < threads; ++t) {
    std::size_t b = n * t / threads;
    std::size_t e = n * (t + 1) / threads;
    pool.emplace_back(run, b, e);
  }
  run(0, n * 1 / threads);
  for (auto& th : pool) th.join();
}

// Convenience: one call per index, chunked under the hood.
template <typename Fn>
void parallel_for_each_index(std::size_t n, Fn&& fn) {
  parallel_for_chunks(n, [&fn](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) fn(i);
  });
}

}  // namespace kdee
