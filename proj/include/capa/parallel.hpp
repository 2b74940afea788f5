#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace capa {

// Worker count: CAPA_THREADS caps (or sets) the pool; 0/unset falls back to
// the hardware count.
inline int default_thread_count() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("CAPA_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1 && cap < hw) return cap;
    if (cap >= 1) return cap;
  }
  return hw;
}

// Runs fn(i) for i in [0, n). With threads <= 1 the loop is sequential.
// Exceptions from workers are rethrown (first one wins).
inline void parallel_for(long n, int threads, const std::function<void(long)>& fn) {
  if (n <= 0) return;
  if (threads <= 0) threads = default_thread_count();
  if (threads <= 1 || n == 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = static_cast<int>(std::min<long>(threads, n));
  std::atomic<long> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        const long i = next.fetch_add(1);
        if (i >= n || failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace capa
