#pragma once

// Deterministic slice parallelism. Work is split into indexed slices; each
// slice result is stored by index and the caller reduces in index order, so
// the outcome never depends on the thread count.

#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace chernlab {

// CHERNLAB_THREADS, default 1.
inline int thread_count() {
  const char* env = std::getenv("CHERNLAB_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  long v = std::strtol(env, &end, 10);
  if (end == env || v < 1) return 1;
  return static_cast<int>(std::min(v, 256L));
}

template <class T, class F>
std::vector<T> map_slices(int count, F&& slice) {
  std::vector<T> out(static_cast<std::size_t>(count));
  const int threads = std::min(thread_count(), count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = slice(i);
    return out;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (int i = t; i < count; i += threads) out[static_cast<std::size_t>(i)] = slice(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace chernlab
