#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace voxsc {

/// Resolves a thread-count request: 0 means "use the hardware", anything
/// else is taken as given (and clamped to at least 1).
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Runs fn(row) for every row in [0, n_rows) on up to n_threads workers.
///
/// Workers take rows in a static stride pattern, so which thread runs a row
/// is irrelevant as long as fn writes only to row-indexed storage. Callers
/// merge per-row results themselves, in row order, which keeps every
/// reduction bit-identical for any thread count.
inline void parallel_rows(int n_rows, int n_threads, const std::function<void(int)>& fn) {
  n_threads = resolve_threads(n_threads);
  if (n_threads <= 1 || n_rows <= 1) {
    for (int r = 0; r < n_rows; ++r) fn(r);
    return;
  }
  const int workers = n_threads < n_rows ? n_threads : n_rows;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&, t]() {
      for (int r = t; r < n_rows; r += workers) fn(r);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace voxsc
