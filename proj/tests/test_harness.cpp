#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "lanlab/errors.hpp"
#include "lanlab/harness/config.hpp"
#include "lanlab/harness/csv.hpp"
#include "lanlab/harness/runner.hpp"
#include "lanlab/harness/thread_pool.hpp"

using namespace lanlab;
using namespace lanlab::harness;
namespace fs = std::filesystem;

namespace {

const char* kChainConfig = R"({
  "model": { "type": "chain", "chain": { "name": "symmetric_two_state" } },
  "theta0": 0.3,
  "seed": 5,
  "output_dir": "unused",
  "scheme": { "h": 1.0, "n": 200, "n_grid": [50, 200], "x0": 0 },
  "lan": { "u_list": [-1, 1], "R": 100, "fisher_mode": "exact", "condition_R": 100 },
  "ergodics": { "batch_lens": [10, 20], "lag_grid": [1, 2, 3], "path_length": 5000 }
})";

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lanlab_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string error_of(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, ParsesChainConfig) {
  const ExperimentConfig c = parse_config(kChainConfig);
  EXPECT_EQ(c.model.type, ModelType::Chain);
  EXPECT_EQ(c.seed, 5u);
  EXPECT_EQ(c.scheme.n, 200u);
  EXPECT_EQ(c.lan.R, 100u);
}

TEST(Config, UnknownKeyNamesThePath) {
  std::string text = kChainConfig;
  text.replace(text.find("\"R\": 100"), 8, "\"R\": 100, \"bogus\": 1");
  const std::string msg = error_of(text);
  EXPECT_NE(msg.find("$.lan"), std::string::npos) << msg;
  EXPECT_NE(msg.find("bogus"), std::string::npos) << msg;
}

TEST(Config, MalformedJsonReportsLineAndColumn) {
  const std::string msg = error_of("{\n  \"theta0\": 0.3,\n  \"seed\": ,\n}");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("column"), std::string::npos) << msg;
}

TEST(Config, RangeChecks) {
  std::string text = kChainConfig;
  text.replace(text.find("\"R\": 100"), 8, "\"R\": 99");
  EXPECT_FALSE(error_of(text).empty());
  text = kChainConfig;
  text.replace(text.find("\"theta0\": 0.3"), 13, "\"theta0\": 1.5");
  EXPECT_THROW(build_model(parse_config(text)), ConfigError);
}

TEST(Config, Fnv1aKnownValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
}

TEST(Csv, FormatNumberRoundTrips) {
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(format_number(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(format_number(-std::numeric_limits<double>::infinity()), "-inf");
  const double x = 1.0 / 3.0;
  EXPECT_EQ(std::stod(format_number(x)), x);
}

TEST(Csv, QuotingAndRoundTrip) {
  EXPECT_EQ(quote_field("plain"), "plain");
  EXPECT_EQ(quote_field("a,b"), "\"a,b\"");
  EXPECT_EQ(quote_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  std::ostringstream out;
  CsvWriter w(out, {"name", "value"});
  w.field("x,\"y\"\nz").field(1.5).end_row();
  w.field("n").field(static_cast<long long>(-3)).end_row();
  EXPECT_NE(out.str().find("\r\n"), std::string::npos);
  std::istringstream in(out.str());
  const CsvTable t = read_csv(in);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][0], "x,\"y\"\nz");
  EXPECT_EQ(t.rows[0][t.column("value")], "1.5");
  EXPECT_EQ(t.rows[1][1], "-3");
  EXPECT_THROW(t.column("missing"), std::exception);
}

TEST(Csv, WrongColumnCountThrows) {
  std::ostringstream out;
  CsvWriter w(out, {"a", "b"});
  w.field(1.0);
  EXPECT_THROW(w.end_row(), std::exception);
}

TEST(ThreadPool, RunsEveryIndexOnce) {
  const ThreadPoolExecutor pool(4);
  std::vector<std::atomic<int>> hits(1000);
  pool.for_each_index(hits.size(), [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(ThreadPool, PropagatesException) {
  const ThreadPoolExecutor pool(3);
  EXPECT_THROW(pool.for_each_index(100,
                                   [](std::size_t i) {
                                     if (i == 57) throw std::runtime_error("boom");
                                   }),
               std::runtime_error);
}

TEST(ThreadPool, ResolveThreadCount) {
  ::unsetenv("LANLAB_THREADS");
  EXPECT_EQ(resolve_thread_count(0), 1u);
  EXPECT_EQ(resolve_thread_count(6), 6u);
  ::setenv("LANLAB_THREADS", "3", 1);
  EXPECT_EQ(resolve_thread_count(0), 3u);
  EXPECT_EQ(resolve_thread_count(2), 2u);
  ::setenv("LANLAB_THREADS", "many", 1);
  EXPECT_THROW(resolve_thread_count(0), ConfigError);
  ::unsetenv("LANLAB_THREADS");
}

TEST(Runner, ChainOracleSucceeds) {
  const fs::path dir = scratch_dir("oracle");
  RunOptions opt;
  opt.out_dir = dir.string();
  opt.plots = false;
  const RunResult r = run_command("chain-oracle", parse_config(kChainConfig), opt);
  EXPECT_EQ(r.exit_code, kExitOk);
  EXPECT_TRUE(fs::exists(dir / "summary.json"));
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
  EXPECT_TRUE(fs::exists(dir / "chain_oracle.csv"));
  EXPECT_LT(r.summary["max_residual"].get<double>(), 1e-12);
  fs::remove_all(dir);
}

TEST(Runner, LanOutputIndependentOfThreads) {
  std::string csv[2];
  for (int k = 0; k < 2; ++k) {
    const fs::path dir = scratch_dir("threads" + std::to_string(k));
    RunOptions opt;
    opt.out_dir = dir.string();
    opt.plots = false;
    opt.threads = k == 0 ? 1 : 4;
    EXPECT_EQ(run_command("lan", parse_config(kChainConfig), opt).exit_code, kExitOk);
    csv[k] = slurp(dir / "lan_replications.csv");
    fs::remove_all(dir);
  }
  EXPECT_FALSE(csv[0].empty());
  EXPECT_EQ(csv[0], csv[1]);
}

TEST(Runner, UnknownCommandThrows) {
  RunOptions opt;
  opt.out_dir = scratch_dir("unknown").string();
  EXPECT_THROW(run_command("nope", parse_config(kChainConfig), opt), std::exception);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch_dir("cli");
  fs::create_directories(dir);
  {
    std::ofstream(dir / "good.json") << kChainConfig;
    std::ofstream(dir / "bad.json") << "{ \"theta0\": ";
  }
  const std::string cli = LANLAB_CLI_PATH;
  auto run = [&](const std::string& args) {
    const int status = std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
  };
  EXPECT_EQ(run("chain-oracle --config " + (dir / "good.json").string() + " --out " +
                (dir / "o").string() + " --no-plots"),
            0);
  EXPECT_EQ(run("chain-oracle --config " + (dir / "bad.json").string() + " --out " +
                (dir / "o").string()),
            2);
  EXPECT_EQ(run("chain-oracle --config " + (dir / "missing.json").string()), 2);
  fs::remove_all(dir);
}
