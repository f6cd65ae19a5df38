#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace brt {

/// 0 means "all hardware threads"; otherwise the requested count.
inline int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Runs fn(i) for i in [begin, end) on up to `threads` workers with dynamic
/// scheduling. fn must only write state owned by index i, which keeps results
/// independent of the schedule. The first exception thrown by any worker is
/// rethrown on the caller's thread.
template <class Fn>
void parallel_for(int begin, int end, int threads, Fn&& fn) {
  const int count = end - begin;
  if (count <= 0) return;
  threads = std::min(resolve_thread_count(threads), count);
  if (threads <= 1) {
    for (int i = begin; i < end; ++i) fn(i);
    return;
  }

  std::atomic<int> next{begin};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= end) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(end, std::memory_order_relaxed);  // drain remaining work
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (int w = 0; w + 1 < threads; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace brt
