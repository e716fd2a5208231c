#pragma once

#include <cstddef>
#include <functional>

namespace lanlab {

/// Runs independent work units indexed 0..count-1. Implementations may run
/// them concurrently; callers write results into per-index slots so that the
/// outcome does not depend on scheduling.
class Executor {
 public:
  virtual ~Executor() = default;
  virtual void for_each_index(std::size_t count,
                              const std::function<void(std::size_t)>& task) const = 0;
};

class SerialExecutor final : public Executor {
 public:
  void for_each_index(std::size_t count,
                      const std::function<void(std::size_t)>& task) const override {
    for (std::size_t i = 0; i < count; ++i) task(i);
  }
};

/// Shared serial instance used as the default argument throughout the library.
const Executor& serial_executor();

}  // namespace lanlab
