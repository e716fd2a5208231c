#pragma once

#include <cstddef>
#include <functional>

#include "lanlab/executor.hpp"

namespace lanlab::harness {

/// Runs work units on `threads` workers pulling indices from a shared atomic
/// counter. The first exception thrown by a task is rethrown on the caller.
class ThreadPoolExecutor final : public Executor {
 public:
  explicit ThreadPoolExecutor(std::size_t threads);
  void for_each_index(std::size_t count,
                      const std::function<void(std::size_t)>& task) const override;
  std::size_t threads() const noexcept { return threads_; }

 private:
  std::size_t threads_;
};

/// --threads value if positive, else LANLAB_THREADS, else 1.
std::size_t resolve_thread_count(long requested);

}  // namespace lanlab::harness
