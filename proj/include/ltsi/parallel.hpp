#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace ltsi {

inline int default_thread_count() {
  if (const char* env = std::getenv("LTSI_LAB_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

// Runs fn(i) for i in [0, count). Callers write results into preallocated
// slots indexed by i, so the outcome is identical for any thread count; if
// several iterations throw, the exception of the smallest index wins.
inline void parallel_for(int count, const std::function<void(int)>& fn,
                         int threads = 0) {
  if (count <= 0) return;
  if (threads <= 0) threads = default_thread_count();
  threads = std::min(threads, count);

  std::vector<std::exception_ptr> errors(count);
  if (threads == 1) {
    for (int i = 0; i < count; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
        break;  // sequential: the first failure is already the smallest index
      }
    }
  } else {
    std::atomic<int> next{0};
    auto worker = [&]() {
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (int i = 0; i < count; ++i)
    if (errors[i]) std::rethrow_exception(errors[i]);
}

}  // namespace ltsi
