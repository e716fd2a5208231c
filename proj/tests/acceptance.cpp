// Acceptance runner: one PASS/FAIL line per criterion, with timings.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lanlab/harness/config.hpp"
#include "lanlab/harness/runner.hpp"
#include "lanlab/harness/thread_pool.hpp"
#include "lanlab/lan_analysis.hpp"
#include "lanlab/levy_noise.hpp"
#include "lanlab/transition_model.hpp"

using namespace lanlab;
using namespace lanlab::harness;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr std::uint64_t kTagMartingale = 4;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Context {
  fs::path config_dir;
  fs::path out_root;
  std::size_t threads = 1;
  // Runs shared between criteria, keyed by "<config>/<command>".
  std::map<std::string, std::pair<RunResult, double>> cache;

  const std::pair<RunResult, double>& run(const std::string& config, const std::string& command) {
    const std::string key = config + "/" + command;
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    RunOptions opt;
    opt.threads = threads;
    opt.plots = false;
    opt.out_dir = (out_root / (config + "_" + command)).string();
    const Clock clock;
    RunResult r = run_command(command, load_config((config_dir / (config + ".json")).string()), opt);
    const double t = clock.seconds();
    return cache.emplace(key, std::make_pair(std::move(r), t)).first->second;
  }
};

const json& lan_result(const json& summary, std::size_t n) {
  for (const auto& r : summary.at("results")) {
    if (r.at("n").get<std::size_t>() == n) return r;
  }
  throw std::runtime_error("lan summary has no result for n = " + std::to_string(n));
}

double num(const json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

// 1. Exact-chain identity suite.
Outcome criterion1(Context& ctx, double& elapsed) {
  Outcome o;
  const auto& [r, t] = ctx.run("chain_two_state", "chain-oracle");
  elapsed = t;
  o.check(r.exit_code == kExitOk, "chain-oracle exit code 0");
  const double res = r.summary.at("max_residual").get<double>();
  o.check(res <= 1e-12, fmt("max residual %.3g <= 1e-12", res));
  o.check(t < 1.0, fmt("runtime %.2f s < 1 s", t));
  return o;
}

// 2. LAN conclusion on the exact chain.
Outcome criterion2(Context& ctx, double& elapsed) {
  Outcome o;
  const auto& [r, t] = ctx.run("chain_two_state", "lan");
  elapsed = t;
  const json& res = lan_result(r.summary, 10000);
  o.check(res.at("replications").get<std::size_t>() == 2000, "R = 2000 at n = 10000");
  const double ad_p = res.at("ad").at("p_value").get<double>();
  o.check(ad_p >= 0.01, fmt("AD p-value %.4f >= 0.01", ad_p));
  const double var = res.at("delta_variance").get<double>();
  o.check(var >= 0.9 && var <= 1.1, fmt("Var(Delta_n) %.4f in [0.9, 1.1]", var));
  for (const auto& p : res.at("psi")) {
    const double m = p.at("median_abs_psi").get<double>();
    o.check(m <= 0.05, fmt("u = %+.0f: median |Psi_n| %.4f <= 0.05", p.at("u").get<double>(), m));
  }
  o.check(t < 120.0, fmt("runtime %.1f s < 120 s", t));
  return o;
}

// 3. zeta diagnostics on the same runs.
Outcome criterion3(Context& ctx, double& elapsed) {
  Outcome o;
  const auto& [r, t] = ctx.run("chain_two_state", "lan");
  elapsed = t;
  const json& res = lan_result(r.summary, 10000);
  for (const auto& p : res.at("psi")) {
    const double u = p.at("u").get<double>();
    const double target = u * u / 4.0;
    const double sq = p.at("median_sum_zeta_sq").get<double>();
    o.check(std::fabs(sq - target) <= 0.1 * target,
            fmt("u = %+.0f: median sum zeta^2 %.4f within 10%% of %.4f", u, sq, target));
    const double combo = p.at("median_centered_combo").get<double>();
    o.check(std::fabs(combo + target) <= 0.05,
            fmt("u = %+.0f: median centered combo %.4f within 0.05 of %.4f", u, combo, -target));
    const double mx = p.at("median_max_abs_zeta").get<double>();
    o.check(mx <= 0.05, fmt("u = %+.0f: median max |zeta| %.4f <= 0.05", u, mx));
    const double cube = p.at("median_sum_abs_zeta_cubed").get<double>();
    o.check(cube <= 0.01, fmt("u = %+.0f: median sum |zeta|^3 %.5f <= 0.01", u, cube));
  }
  o.check(t < 120.0, fmt("runtime %.1f s < 120 s", t));
  return o;
}

// 4. Condition decay on the exact chain.
Outcome criterion4(Context& ctx, double& elapsed) {
  Outcome o;
  const auto& [r, t] = ctx.run("chain_two_state", "conditions");
  elapsed = t;
  for (const auto& row : r.summary.at("rows")) {
    const double z = row.at("cond3_z").get<double>();
    o.check(std::fabs(z) <= 3.0, fmt("n = %.0f: cond3 mean %.5f, |z| = %.2f <= 3",
                                     row.at("n").get<double>(), row.at("cond3_mean").get<double>(),
                                     std::fabs(z)));
  }
  const double exact4 = num(r.summary.at("cond4_exact_slope"));
  const double s4 = std::isnan(exact4) ? num(r.summary.at("cond4_slope")) : exact4;
  o.check(s4 >= -1.2 && s4 <= -0.8,
          fmt("cond4 slope %.4f in [-1.2, -0.8] (MC %.4f)", s4, num(r.summary.at("cond4_slope"))));
  const double s5 = num(r.summary.at("cond5_slope"));
  o.check(s5 >= -1.2 && s5 <= -0.8, fmt("cond5 slope %.4f in [-1.2, -0.8]", s5));
  o.check(t < 120.0, fmt("runtime %.1f s < 120 s", t));
  return o;
}

// 5. Levy noise: increment moments against quadrature, condition H.
Outcome criterion5(Context& ctx, double& elapsed) {
  Outcome o;
  const Clock clock;
  const ExperimentConfig cfg = load_config((ctx.config_dir / "sde_tempered_stable.json").string());
  const BuiltModel built = build_model(cfg);
  const LevyNoise& noise = *built.noise;
  const double t = cfg.scheme.h;
  const LevyMeasure& mu = noise.measure();
  const double delta = noise.config().delta_trunc;
  const double mean_q = t * (noise.drift_rate() + mu.integrate([](double u) { return u; }, delta, INFINITY));
  const double var_q = t * mu.integrate([](double u) { return u * u; }, delta, INFINITY);

  const std::size_t draws = 1000000;
  CounterStream rng = derive_stream(cfg.seed, 0);
  double s1 = 0.0, s2 = 0.0, s4 = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const double z = sample_increment(noise, t, rng) - mean_q;
    s1 += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  const double n = static_cast<double>(draws);
  const double m1 = s1 / n, m2 = s2 / n, m4 = s4 / n;
  const double mean_se = std::sqrt(m2 / n);
  const double var_hat = m2 - m1 * m1;
  const double var_se = std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);
  o.check(std::fabs(m1) <= 3.0 * mean_se,
          fmt("mean %.5f vs quadrature %.5f (SE %.5f)", m1 + mean_q, mean_q, mean_se));
  o.check(std::fabs(var_hat - var_q) <= 3.0 * var_se,
          fmt("variance %.5f vs quadrature %.5f (SE %.5f)", var_hat, var_q, var_se));

  const auto& [r, th] = ctx.run("sde_tempered_stable", "check-h");
  const json& h = r.summary.at("h_report");
  o.check(h.at("passed").get<bool>(), "check_condition_H passes on the shipped spec");
  const double c0 = h.at("c0_first").get<double>();
  o.check(std::fabs(c0 - 2.5) <= 1e-3, fmt("H(iii) constant %.6f matches 2.5", c0));
  elapsed = clock.seconds();
  o.check(elapsed < 60.0, fmt("runtime %.1f s < 60 s", elapsed));
  return o;
}

// 6. SDE pipeline.
Outcome criterion6(Context& ctx, double& elapsed) {
  Outcome o;
  const Clock clock;
  const ExperimentConfig cfg = load_config((ctx.config_dir / "sde_tempered_stable.json").string());
  const BuiltModel built = build_model(cfg);
  const MartingaleResidual mr =
      score_martingale_residual(*built.model, cfg.theta0, cfg.scheme.x0, cfg.estimation.martingale_M,
                                derive_stream(domain_seed(cfg.seed, kTagMartingale), 0));
  o.check(std::fabs(mr.mean) < 3.0 * mr.standard_error,
          fmt("martingale residual %.5f, SE %.5f (M = %.0f)", mr.mean, mr.standard_error,
              static_cast<double>(cfg.estimation.martingale_M)));

  const auto& erg = ctx.run("sde_tempered_stable", "ergodic").first;
  const double plugin = erg.summary.at("sigma2_plugin").at("value").get<double>();
  const double plugin_se = erg.summary.at("sigma2_plugin").at("standard_error").get<double>();
  bool found = false;
  for (const auto& row : erg.summary.at("fisher_growth")) {
    if (row.at("n").get<std::size_t>() != 2000) continue;
    found = true;
    const double per = row.at("per_step").get<double>();
    const double rel = (per - plugin) / plugin;
    o.check(std::fabs(rel) <= 0.15,
            fmt("I_n/n %.4f vs sigma2_plugin %.4f: relative %.4f", per, plugin, rel) +
                fmt(" (SEs %.4f, %.4f)", row.at("standard_error").get<double>(), plugin_se));
  }
  o.check(found, "fisher_growth has n = 2000");

  const auto& lan = ctx.run("sde_tempered_stable", "lan").first;
  const json& res = lan_result(lan.summary, 2000);
  const double ks_p = res.at("ks").at("p_value").get<double>();
  o.check(!res.at("fatal").get<bool>(), fmt("discarded replications %.0f", num(res.at("discarded"))));
  o.check(ks_p >= 0.01, fmt("KS p-value %.4f >= 0.01", ks_p) +
                            fmt(" (mean %.4f +- %.4f, variance %.4f)", num(res.at("delta_mean")),
                                num(res.at("delta_se")), num(res.at("delta_variance"))));
  elapsed = clock.seconds();
  o.check(elapsed < 1200.0, fmt("runtime %.1f s < 1200 s", elapsed));
  return o;
}

// 7. Ergodic cross-checks.
Outcome criterion7(Context& ctx, double& elapsed) {
  Outcome o;
  const auto& [chain, tc] = ctx.run("chain_two_state", "ergodic");
  const double lrv = chain.summary.at("longrun_variance").at("plateau").get<double>();
  const double plugin = chain.summary.at("sigma2_plugin").at("value").get<double>();
  o.check(std::fabs(lrv - plugin) <= 0.2 * plugin,
          fmt("long-run variance %.4f within 20%% of sigma2_plugin %.4f", lrv, plugin));
  const double c = chain.summary.at("mixing").at("c_hat").get<double>();
  const double ref = chain.summary.at("mixing").at("reference_rate").get<double>();
  o.check(std::fabs(c - ref) <= 0.15 * ref, fmt("mixing rate %.4f within 15%% of %.4f", c, ref));

  const auto& [sde, ts] = ctx.run("sde_tempered_stable", "ergodic");
  for (const auto& m : sde.summary.at("invariant_moments")) {
    o.check(!m.at("unstable").get<bool>(),
            fmt("p = %.0f: relative drift %.4f < 0.2", m.at("p").get<double>(),
                m.at("relative_drift").get<double>()));
  }
  elapsed = tc + ts;
  o.check(elapsed < 300.0, fmt("runtime %.1f s < 300 s", elapsed));
  return o;
}

const char* kSmallChain = R"({
  "model": { "type": "chain", "chain": { "name": "softmax_three_state" } },
  "theta0": 0.4,
  "seed": 99,
  "output_dir": "unused",
  "scheme": { "h": 1.0, "n": 500, "n_grid": [100, 500], "x0": 0 },
  "lan": { "u_list": [-1, 1], "R": 200, "fisher_mode": "monte_carlo", "fisher_R": 100,
           "condition_R": 100, "psi_n_grid": [100] },
  "ergodics": { "batch_lens": [10, 20, 40], "lag_grid": [1, 2, 3], "path_length": 10000,
                "fisher_n_grid": [100, 500] }
})";

const char* kSmallSde = R"({
  "model": {
    "type": "sde",
    "noise": { "kind": "tempered_stable", "alpha": 0.5, "lambda": 1.0, "c": 1.0,
               "u0": 1.0, "beta": 1.0, "delta_trunc": 0.05 },
    "drift": { "name": "affine", "params": { "b0": 0.0 },
               "theta_interval": [0.1, 3.0], "theta_window": [0.5, 1.5] },
    "steps_per_h": 8
  },
  "theta0": 1.0,
  "seed": 7,
  "output_dir": "unused",
  "scheme": { "h": 0.5, "n": 50, "n_grid": [25, 50], "x0": 0.0 },
  "lan": { "u_list": [-1, 1], "R": 100, "fisher_mode": "monte_carlo", "fisher_R": 20,
           "condition_R": 100 },
  "estimation": { "M": 100, "bandwidth": 0.3, "fd_step": 0.01, "martingale_M": 1000 }
})";

std::map<std::string, std::string> csv_bytes(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() != ".csv") continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    out[e.path().filename().string()] = s.str();
  }
  return out;
}

// 8. Byte-identical CSVs across thread counts.
Outcome criterion8(Context& ctx, double& elapsed) {
  Outcome o;
  const Clock clock;
  struct Job {
    const char* name;
    const char* text;
    std::vector<std::string> commands;
  };
  const std::vector<Job> jobs{{"chain", kSmallChain, {"lan", "conditions", "ergodic"}},
                              {"sde", kSmallSde, {"lan", "simulate"}}};
  for (const Job& job : jobs) {
    for (const std::string& cmd : job.commands) {
      std::map<std::string, std::string> reference;
      std::size_t files = 0;
      bool same = true;
      for (std::size_t threads : {1u, 4u, 8u}) {
        RunOptions opt;
        opt.threads = threads;
        opt.plots = false;
        const fs::path dir = ctx.out_root / ("repro_" + std::string(job.name) + "_" + cmd + "_" +
                                             std::to_string(threads));
        opt.out_dir = dir.string();
        run_command(cmd, parse_config(job.text), opt);
        auto bytes = csv_bytes(dir);
        if (threads == 1) {
          reference = std::move(bytes);
          files = reference.size();
        } else {
          same = same && bytes == reference;
        }
      }
      o.check(same && files > 0, std::string(job.name) + " " + cmd + ": " + std::to_string(files) +
                                     " CSV files identical for threads 1, 4, 8");
    }
  }
  elapsed = clock.seconds();
  o.check(elapsed < 60.0, fmt("runtime %.1f s < 60 s", elapsed));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lanlab acceptance criteria"};
  std::string config_dir = LANLAB_CONFIG_DIR;
  std::string out_dir = (fs::temp_directory_path() / "lanlab_acceptance").string();
  std::vector<int> only;
  long threads = 0;
  bool verbose = false;
  app.add_option("--configs", config_dir, "directory with the shipped configs");
  app.add_option("--out", out_dir, "scratch output directory");
  app.add_option("--only", only, "criteria to run (default: all)")->delimiter(',')->check(CLI::Range(1, 8));
  app.add_option("--threads", threads, "worker threads");
  app.add_flag("-v,--verbose", verbose, "print every check");
  CLI11_PARSE(app, argc, argv);

  Context ctx;
  ctx.config_dir = config_dir;
  ctx.out_root = out_dir;
  ctx.threads = resolve_thread_count(threads);
  fs::remove_all(ctx.out_root);
  fs::create_directories(ctx.out_root);

  using Fn = Outcome (*)(Context&, double&);
  const std::vector<std::pair<int, Fn>> criteria{{1, criterion1}, {2, criterion2}, {3, criterion3},
                                                 {4, criterion4}, {5, criterion5}, {6, criterion6},
                                                 {7, criterion7}, {8, criterion8}};
  const std::set<int> selected(only.begin(), only.end());
  int failures = 0;
  for (const auto& [id, fn] : criteria) {
    if (!selected.empty() && !selected.count(id)) continue;
    double elapsed = 0.0;
    Outcome o;
    try {
      o = fn(ctx, elapsed);
    } catch (const std::exception& e) {
      o.check(false, std::string("error: ") + e.what());
    }
    failures += !o.pass;
    std::printf("criterion %d: %s (%.1f s)\n", id, o.pass ? "PASS" : "FAIL", elapsed);
    for (const auto& note : o.notes) {
      if (verbose || note.rfind("FAIL", 0) == 0) std::printf("    %s\n", note.c_str());
    }
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
