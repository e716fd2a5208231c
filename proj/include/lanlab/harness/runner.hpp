#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lanlab/harness/config.hpp"

namespace lanlab::harness {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 2,
  kExitViolation = 3,
  kExitRuntimeFailure = 4,
};

struct RunOptions {
  std::size_t threads = 1;
  /// Overrides the config's output_dir when non-empty.
  std::string out_dir;
  bool plots = true;
  std::optional<std::uint64_t> seed;
};

struct RunResult {
  int exit_code = kExitOk;
  nlohmann::json summary;
  std::string out_dir;
  /// Files written, relative to out_dir.
  std::vector<std::string> files;
};

/// check-h, check-a, chain-oracle, lan, conditions, ergodic, simulate, report.
const std::vector<std::string>& command_names();

/// Runs one subcommand and writes its artifacts (summary.json, CSVs, SVGs and
/// manifest.json) under the output directory. Errors propagate as exceptions;
/// findings that violate a checked condition give kExitViolation.
RunResult run_command(const std::string& command, ExperimentConfig config, const RunOptions& options);

}  // namespace lanlab::harness
