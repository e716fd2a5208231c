#include "lanlab/harness/thread_pool.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "lanlab/errors.hpp"

namespace lanlab::harness {

ThreadPoolExecutor::ThreadPoolExecutor(std::size_t threads) : threads_(threads < 1 ? 1 : threads) {}

void ThreadPoolExecutor::for_each_index(std::size_t count,
                                        const std::function<void(std::size_t)>& task) const {
  const std::size_t workers = std::min(threads_, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::size_t resolve_thread_count(long requested) {
  if (requested > 0) return static_cast<std::size_t>(requested);
  if (const char* env = std::getenv("LANLAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
      throw ConfigError(std::string("LANLAB_THREADS must be a positive integer, got '") + env + "'");
    }
    return static_cast<std::size_t>(v);
  }
  return 1;
}

}  // namespace lanlab::harness
