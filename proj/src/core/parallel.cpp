#include "core/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

namespace mfusion {

int thread_count() {
  if (const char* env = std::getenv("MFUSION_THREADS")) {
    int n = std::atoi(env);
    return n >= 1 ? n : 1;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::ptrdiff_t begin, std::ptrdiff_t end,
                  const std::function<void(std::ptrdiff_t)>& fn) {
  const std::ptrdiff_t total = end - begin;
  if (total <= 0) return;

  const int workers = static_cast<int>(std::min<std::ptrdiff_t>(thread_count(), total));
  if (workers <= 1) {
    for (std::ptrdiff_t i = begin; i < end; ++i) fn(i);
    return;
  }

  const std::ptrdiff_t chunk = std::max<std::ptrdiff_t>(1, total / (8 * workers));
  std::atomic<std::ptrdiff_t> next(begin);
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto body = [&] {
    for (;;) {
      std::ptrdiff_t lo = next.fetch_add(chunk);
      if (lo >= end) return;
      std::ptrdiff_t hi = std::min(lo + chunk, end);
      try {
        for (std::ptrdiff_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int t = 1; t < workers; ++t) pool.emplace_back(body);
  body();
  for (auto& th : pool) th.join();

  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace mfusion
