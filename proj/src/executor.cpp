#include "lanlab/executor.hpp"

namespace lanlab {

const Executor& serial_executor() {
  static const SerialExecutor instance;
  return instance;
}

}  // namespace lanlab
