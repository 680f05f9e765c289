#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "bcs/types.hpp"

namespace bcs {

/// Runs fn(i) for i in [0, count) on up to `workers` threads. Work items are
/// claimed from a shared counter; results must be written to per-index
/// slots so the outcome does not depend on scheduling. The first exception
/// thrown by any item is rethrown after all threads join.
template <typename Fn>
void parallel_for(Index count, Index workers, Fn &&fn)
{
  if (count <= 0) { return; }
  workers = std::clamp<Index>(workers, 1, count);
  if (workers == 1) {
    for (Index i = 0; i < count; ++i) { fn(i); }
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      Index const i = next.fetch_add(1);
      if (i >= count) { return; }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) { error = std::current_exception(); }
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  for (Index w = 1; w < workers; ++w) { pool.emplace_back(body); }
  body();
  for (auto &t : pool) { t.join(); }
  if (error) { std::rethrow_exception(error); }
}

} // namespace bcs
