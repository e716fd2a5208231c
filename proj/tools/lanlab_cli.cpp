#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lanlab/errors.hpp"
#include "lanlab/harness/config.hpp"
#include "lanlab/harness/runner.hpp"
#include "lanlab/harness/thread_pool.hpp"

namespace h = lanlab::harness;

int main(int argc, char** argv) {
  CLI::App app{"lanlab: LAN experiments for discretely observed jump SDEs and finite chains"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  long threads = 0;
  bool no_plots = false;

  for (const std::string& name : h::command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "experiment configuration (JSON)")->required();
    sub->add_option("--seed", seed, "overrides the configured master seed");
    sub->add_option("--threads", threads, "worker threads (default: LANLAB_THREADS or 1)");
    sub->add_option("--out", out_dir, "output directory (default: output_dir from the config)");
    sub->add_flag("--no-plots", no_plots, "skip SVG figures");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : h::kExitConfigError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const h::ExperimentConfig config = h::load_config(config_path);
    h::RunOptions options;
    options.threads = h::resolve_thread_count(threads);
    options.out_dir = out_dir;
    options.plots = !no_plots;
    if (app.get_subcommands().front()->count("--seed") > 0) options.seed = seed;
    const h::RunResult result = h::run_command(command, config, options);
    std::cout << result.summary.dump(2) << '\n';
    return result.exit_code;
  } catch (const lanlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return h::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << command << " failed: " << e.what() << '\n';
    return h::kExitRuntimeFailure;
  }
}
