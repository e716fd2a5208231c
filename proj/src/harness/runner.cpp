#include "lanlab/harness/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "lanlab/descriptive.hpp"
#include "lanlab/errors.hpp"
#include "lanlab/ergodics.hpp"
#include "lanlab/harness/csv.hpp"
#include "lanlab/harness/svg.hpp"
#include "lanlab/harness/thread_pool.hpp"

namespace lanlab::harness {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Tags for auxiliary stream families (see domain_seed); 1 and 2 are used by
// the LAN module itself.
constexpr std::uint64_t kTagErgodicPath = 3;
constexpr std::uint64_t kTagMartingale = 4;
constexpr std::uint64_t kTagFisherGrowth = 5;
constexpr std::uint64_t kTagSimulate = 6;
constexpr std::uint64_t kTagMoments = 7;

constexpr double kOracleTolerance = 1e-12;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

/// Collects the artifacts of one run.
class Output {
 public:
  Output(std::string dir, bool plots) : dir_(std::move(dir)), plots_(plots) {
    fs::create_directories(dir_);
  }

  void write(const std::string& name, const std::string& bytes) {
    std::ofstream out(fs::path(dir_) / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (fs::path(dir_) / name).string());
    out << bytes;
    if (!out) throw std::runtime_error("write failed for " + name);
    files_.emplace_back(name, fnv1a64(bytes));
  }

  /// Builds a CSV through `fill` and writes it.
  void csv(const std::string& name, std::vector<std::string> header,
           const std::function<void(CsvWriter&)>& fill) {
    std::ostringstream buf;
    CsvWriter w(buf, std::move(header));
    fill(w);
    write(name, buf.str());
  }

  void plot(const std::string& name, const std::function<std::string()>& render) {
    if (!plots_) return;
    try {
      write(name, render());
    } catch (const std::invalid_argument&) {
      // Nothing drawable (e.g. every value non-finite); skip the figure.
    }
  }

  const std::string& dir() const { return dir_; }
  const std::vector<std::pair<std::string, std::uint64_t>>& files() const { return files_; }

 private:
  std::string dir_;
  bool plots_;
  std::vector<std::pair<std::string, std::uint64_t>> files_;
};

struct Context {
  const ExperimentConfig& config;
  const Executor& executor;
  Output& out;
  json& summary;
};

const SdeTransitionModel& require_sde(const BuiltModel& built, const std::string& command) {
  if (!built.sde) throw ConfigError("$.model.type: '" + command + "' requires an sde model");
  return *built.sde;
}

const FiniteChainModel& require_chain(const BuiltModel& built, const std::string& command) {
  if (!built.chain) throw ConfigError("$.model.type: '" + command + "' requires a chain model");
  return *built.chain;
}

std::vector<std::size_t> n_grid_or_n(const SchemeConfig& s) {
  return s.n_grid.empty() ? std::vector<std::size_t>{s.n} : s.n_grid;
}

json noise_json(const LevyNoise& noise, double h) {
  const auto& spec = noise.measure().spec();
  return {{"delta_trunc", noise.config().delta_trunc},
          {"jump_intensity", noise.jump_intensity()},
          {"compensator", noise.compensator()},
          {"drift_rate", noise.drift_rate()},
          {"truncation_error", truncation_error(spec, noise.config().delta_trunc)},
          {"truncation_error_over_h", truncation_error(spec, noise.config().delta_trunc) / h}};
}

// check-h -------------------------------------------------------------------

int cmd_check_h(Context& ctx, const BuiltModel& built) {
  require_sde(built, "check-h");
  const auto& cfg = ctx.config;
  const double beta = cfg.checks.beta.value_or(cfg.model.noise.spec.beta);
  ctx.summary["noise"] = noise_json(*built.noise, cfg.scheme.h);
  try {
    const HReport r = check_condition_H(cfg.model.noise.spec, beta, cfg.checks.c0_probe_grid, cfg.checks.eps_grid);
    json iv = json::array();
    for (const auto& [eps, v] : r.h_iv_values) iv.push_back({{"eps", eps}, {"value", v}});
    ctx.summary["h_report"] = {{"beta", beta},
                               {"moment_4_beta", r.moment_4_beta},
                               {"min_density", r.min_density},
                               {"c0_first", r.c0_first},
                               {"c0_second", r.c0_second},
                               {"h_iv", iv},
                               {"passed", r.passed},
                               {"findings", r.findings}};
    ctx.out.csv("h_iv.csv", {"eps", "value"}, [&](CsvWriter& w) {
      for (const auto& [eps, v] : r.h_iv_values) {
        w.field(eps).field(v);
        w.end_row();
      }
    });
    return r.passed ? kExitOk : kExitViolation;
  } catch (const ConditionHViolation& e) {
    ctx.summary["h_report"] = {{"beta", beta},
                               {"passed", false},
                               {"violation", e.part() == ConditionHViolation::Part::MomentTail ? "moment_tail"
                                                                                                : "positive_density"},
                               {"findings", {e.what()}}};
    return kExitViolation;
  }
}

// check-a -------------------------------------------------------------------

std::vector<double> linspace(double lo, double hi, std::size_t k) {
  std::vector<double> v(k);
  for (std::size_t i = 0; i < k; ++i) v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(k - 1);
  return v;
}

int cmd_check_a(Context& ctx, const BuiltModel& built) {
  const auto& sde = require_sde(built, "check-a");
  const auto& cfg = ctx.config;
  const auto& drift = sde.drift();
  const auto x_grid = cfg.checks.x_grid.empty() ? linspace(-10.0, 10.0, 41) : cfg.checks.x_grid;
  const auto theta_grid = cfg.checks.theta_grid.empty()
                              ? linspace(drift.theta_window().lo, drift.theta_window().hi, 9)
                              : cfg.checks.theta_grid;
  int code = kExitOk;
  try {
    const AReport a = check_condition_A(drift, x_grid, theta_grid, cfg.checks.radius);
    ctx.summary["a_report"] = {{"passed", true},
                               {"growth_constant", a.growth_constant},
                               {"dissipativity_margin", a.dissipativity_margin},
                               {"margin_x", a.margin_x},
                               {"margin_theta", a.margin_theta}};
  } catch (const ConditionAViolation& e) {
    ctx.summary["a_report"] = {{"passed", false}, {"x", e.x()}, {"theta", e.theta()}, {"finding", e.what()}};
    return kExitViolation;
  }
  CounterStream rng = derive_stream(domain_seed(cfg.seed, kTagMoments), 0);
  const MomentTable m = moment_check(drift, cfg.theta0, sde.noise(), cfg.scheme.x0, cfg.checks.moment_p,
                                     cfg.checks.moment_t_grid, cfg.checks.moment_paths, sde.dt(), rng);
  ctx.summary["moments"] = {{"p", cfg.checks.moment_p}, {"implied_constant", m.implied_constant}};
  ctx.out.csv("moments.csv", {"t", "mean_abs_x_p", "standard_error"}, [&](CsvWriter& w) {
    for (const auto& row : m.rows) {
      w.field(row.t).field(row.mean).field(row.standard_error);
      w.end_row();
    }
  });
  return code;
}

// chain-oracle --------------------------------------------------------------

int cmd_chain_oracle(Context& ctx, const BuiltModel& built) {
  const auto& chain = require_chain(built, "chain-oracle");
  const double theta = ctx.config.theta0;
  const std::size_t S = chain.states();
  const ChainMatrices P = chain.matrices(theta);
  struct Check {
    std::string identity;
    std::string where;
    double value;
    double reference;
    double residual;
  };
  std::vector<Check> checks;
  auto add = [&](std::string id, std::string where, double value, double reference, bool relative) {
    double res = std::fabs(value - reference);
    if (relative && reference != 0.0) res /= std::fabs(reference);
    checks.push_back({std::move(id), std::move(where), value, reference, res});
  };

  for (std::size_t i = 0; i < S; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < S; ++j) {
      row += P.at(i, j);
      if (P.at(i, j) <= 0.0) continue;
      const ExactScore s = exact_score(chain, theta, i, j);
      const std::string where = std::to_string(i) + "->" + std::to_string(j);
      add("score_equals_2q_over_sqrt_p", where, s.g, 2.0 * s.q / std::sqrt(P.at(i, j)), false);
      CounterStream unused(0, 0);
      const TransitionEval e = chain.evaluate(theta, static_cast<double>(i), static_cast<double>(j), {}, unused);
      add("model_score_matches_dp_over_p", where, e.score, P.d_at(i, j) / P.at(i, j), false);
    }
    add("row_stochastic", std::to_string(i), row, 1.0, false);
    const MartingaleResidual mr =
        score_martingale_residual(chain, theta, static_cast<double>(i), 1, CounterStream(0, 0));
    add("score_mean_zero", std::to_string(i), mr.mean, 0.0, false);
  }

  const std::size_t i0 = chain.state_index(ctx.config.scheme.x0);
  for (std::size_t n = 1; n <= 6; ++n) {
    const double dp = exact_fisher_info(chain, theta, i0, n);
    add("fisher_dp_vs_enumeration", "n=" + std::to_string(n), dp, brute_force_fisher_info(chain, theta, i0, n), true);
    if (chain.name() == "symmetric_two_state") {
      add("fisher_closed_form", "n=" + std::to_string(n), dp, static_cast<double>(n) / (theta * (1.0 - theta)), true);
    }
  }
  const auto pi = stationary_distribution(chain, theta);
  const double sigma2 = exact_sigma2(chain, theta);
  for (std::size_t n : {std::size_t{1}, std::size_t{6}, std::size_t{100}}) {
    double stationary_info = 0.0;
    for (std::size_t i = 0; i < S; ++i) stationary_info += pi[i] * exact_fisher_info(chain, theta, i, n);
    add("sigma2_equals_stationary_In_over_n", "n=" + std::to_string(n), stationary_info / static_cast<double>(n),
        sigma2, true);
  }

  double worst = 0.0;
  for (const auto& c : checks) worst = std::max(worst, c.residual);
  ctx.out.csv("chain_oracle.csv", {"identity", "where", "value", "reference", "residual"}, [&](CsvWriter& w) {
    for (const auto& c : checks) {
      w.field(c.identity).field(c.where).field(c.value).field(c.reference).field(c.residual);
      w.end_row();
    }
  });
  ctx.summary["chain"] = chain.name();
  ctx.summary["sigma2"] = sigma2;
  ctx.summary["checks"] = checks.size();
  ctx.summary["max_residual"] = worst;
  ctx.summary["tolerance"] = kOracleTolerance;
  ctx.summary["passed"] = worst <= kOracleTolerance;
  return worst <= kOracleTolerance ? kExitOk : kExitViolation;
}

// lan -----------------------------------------------------------------------

const std::vector<std::string> kLanHeader = {
    "n", "rep", "ok", "u", "delta_n", "sum_g", "sum_g_sq", "log_Z", "psi_n", "sum_zeta_sq",
    "max_abs_zeta", "sum_abs_zeta_cubed", "centered_combo", "cond_sum_zeta_sq", "error"};

json lan_summary_json(const LanReport& r) {
  json psi = json::array();
  for (const auto& s : r.psi) {
    psi.push_back({{"u", s.u},
                   {"mean_abs_psi", s.mean_abs_psi},
                   {"median_abs_psi", s.median_abs_psi},
                   {"q90_abs_psi", s.q90_abs_psi},
                   {"median_sum_zeta_sq", s.median_sum_zeta_sq},
                   {"median_max_abs_zeta", s.median_max_abs_zeta},
                   {"median_sum_abs_zeta_cubed", s.median_sum_abs_zeta_cubed},
                   {"median_centered_combo", s.median_centered_combo},
                   {"median_cond_sum_zeta_sq", s.median_cond_sum_zeta_sq}});
  }
  return {{"n", r.n},
          {"replications", r.replications},
          {"fisher_information", r.rate.fisher_information},
          {"fisher_information_se", r.rate.standard_error},
          {"rate", r.rate.rate},
          {"discarded", r.discarded},
          {"fatal", r.fatal},
          {"delta_mean", r.delta_mean},
          {"delta_se", r.delta_se},
          {"delta_variance", r.delta_variance},
          {"ks", {{"statistic", r.ks.statistic}, {"p_value", r.ks.p_value}}},
          {"ad", {{"statistic", r.ad.statistic}, {"p_value", r.ad.p_value}}},
          {"psi", psi}};
}

void write_lan_plots(Output& out, const std::vector<LanReport>& reports, std::size_t main_n) {
  const LanReport& last = *std::find_if(reports.begin(), reports.end(), [&](const LanReport& r) {
    return r.n == main_n;
  });
  std::vector<double> deltas;
  for (const auto& rec : last.records) {
    if (rec.ok) deltas.push_back(rec.delta_n);
  }
  const std::string tag = " (n = " + std::to_string(last.n) + ")";
  out.plot("delta_hist.svg", [&] { return histogram_svg(deltas, "Delta_n histogram" + tag); });
  out.plot("delta_qq.svg", [&] { return qq_svg(deltas, "Delta_n normal QQ plot" + tag); });
  if (reports.size() > 1) {
    std::vector<Series> series;
    for (std::size_t k = 0; k < last.u_list.size(); ++k) {
      Series s{"u = " + format_number(last.u_list[k]), {}, {}};
      for (const auto& r : reports) {
        if (r.psi.size() <= k) continue;
        s.x.push_back(static_cast<double>(r.n));
        s.y.push_back(r.psi[k].median_abs_psi);
      }
      series.push_back(std::move(s));
    }
    out.plot("psi_vs_n.svg", [&] {
      return line_svg(series, {"median |Psi_n| against n", "n", "median |Psi_n|", true, true});
    });
  }
}

void write_lan_csv(Output& out, const std::vector<LanReport>& reports) {
  out.csv("lan_replications.csv", kLanHeader, [&](CsvWriter& w) {
    for (const auto& r : reports) {
      for (const auto& rec : r.records) {
        for (std::size_t k = 0; k < r.u_list.size(); ++k) {
          w.field(r.n).field(rec.rep).field(static_cast<long long>(rec.ok)).field(r.u_list[k]);
          if (rec.ok) {
            const auto& l = rec.lan[k];
            const auto& z = rec.zeta[k];
            w.field(rec.delta_n).field(rec.sum_g).field(rec.sum_g_sq).field(l.log_Z).field(l.psi_n);
            w.field(z.sum_zeta_sq).field(z.max_abs_zeta).field(z.sum_abs_zeta_cubed).field(z.centered_combo);
            w.field(z.cond_sum_zeta_sq).field("");
          } else {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            for (int c = 0; c < 10; ++c) w.field(nan);
            w.field(rec.error);
          }
          w.end_row();
        }
      }
    }
  });
}

int cmd_lan(Context& ctx, const BuiltModel& built) {
  const auto& cfg = ctx.config;
  LanOptions opt;
  opt.fisher.mode = cfg.lan.fisher_mode;
  opt.fisher.replications = cfg.lan.fisher_R;
  opt.max_discard_fraction = cfg.lan.max_discard_fraction;
  std::vector<LanReport> reports;
  json per_n = json::array();
  bool fatal = false;
  std::vector<std::size_t> grid = cfg.lan.psi_n_grid;
  if (std::find(grid.begin(), grid.end(), cfg.scheme.n) == grid.end()) grid.push_back(cfg.scheme.n);
  std::sort(grid.begin(), grid.end());
  for (std::size_t n : grid) {
    reports.push_back(lan_experiment(*built.model, cfg.theta0, cfg.scheme.x0, n, cfg.lan.u_list, cfg.lan.R,
                                     cfg.seed, opt, ctx.executor));
    per_n.push_back(lan_summary_json(reports.back()));
    fatal = fatal || reports.back().fatal;
  }
  write_lan_csv(ctx.out, reports);
  ctx.out.csv("lan_rates.csv", {"n", "fisher_information", "fisher_information_se", "rate"}, [&](CsvWriter& w) {
    for (const auto& r : reports) {
      w.field(r.n).field(r.rate.fisher_information).field(r.rate.standard_error).field(r.rate.rate);
      w.end_row();
    }
  });
  write_lan_plots(ctx.out, reports, cfg.scheme.n);
  ctx.summary["theta0"] = cfg.theta0;
  ctx.summary["u_list"] = cfg.lan.u_list;
  ctx.summary["fisher_mode"] = cfg.lan.fisher_mode == FisherMode::Exact ? "exact" : "monte_carlo";
  ctx.summary["n"] = cfg.scheme.n;
  ctx.summary["results"] = per_n;
  if (fatal) {
    ctx.summary["error"] = "more than the allowed fraction of replications was discarded";
    return kExitRuntimeFailure;
  }
  return kExitOk;
}

// conditions ----------------------------------------------------------------

int cmd_conditions(Context& ctx, const BuiltModel& built) {
  const auto& cfg = ctx.config;
  ConditionOptions opt;
  opt.p_exponent = cfg.lan.p_exponent;
  opt.N_sup = cfg.lan.N_sup;
  opt.v_points = cfg.lan.v_points;
  opt.replications = cfg.lan.condition_R;
  opt.fisher.mode = cfg.lan.fisher_mode;
  opt.fisher.replications = cfg.lan.fisher_R;
  const auto grid = n_grid_or_n(cfg.scheme);
  const auto rows = condition_stats(*built.model, cfg.theta0, cfg.scheme.x0, grid, opt, cfg.seed, ctx.executor);

  ctx.out.csv("conditions.csv",
              {"n", "fisher_information", "rate", "cond3_mean", "cond3_se", "cond4_mean", "cond4_se", "cond4_exact",
               "cond5", "cond5_argmax_v", "cond5_majorant"},
              [&](CsvWriter& w) {
                for (const auto& r : rows) {
                  w.field(r.n).field(r.fisher_information).field(r.rate).field(r.cond3_mean).field(r.cond3_se);
                  w.field(r.cond4_mean).field(r.cond4_se).field(r.cond4_exact).field(r.cond5).field(r.cond5_argmax_v);
                  w.field(static_cast<long long>(r.cond5_majorant));
                  w.end_row();
                }
              });

  std::vector<double> ns, c4, c4x, c5;
  json rows_json = json::array();
  for (const auto& r : rows) {
    ns.push_back(static_cast<double>(r.n));
    c4.push_back(r.cond4_mean);
    c4x.push_back(r.cond4_exact);
    c5.push_back(r.cond5);
    rows_json.push_back({{"n", r.n},
                         {"cond3_mean", r.cond3_mean},
                         {"cond3_se", r.cond3_se},
                         {"cond3_z", r.cond3_se > 0.0 ? (r.cond3_mean - 1.0) / r.cond3_se : 0.0},
                         {"cond4_mean", r.cond4_mean},
                         {"cond4_exact", r.cond4_exact},
                         {"cond5", r.cond5},
                         {"cond5_majorant", r.cond5_majorant}});
  }
  ctx.summary["p_exponent"] = opt.p_exponent;
  ctx.summary["N_sup"] = opt.N_sup;
  ctx.summary["rows"] = rows_json;
  if (rows.size() >= 2) {
    auto slope = [&](const std::vector<double>& y) -> json {
      for (double v : y) {
        if (!(v > 0.0) || !std::isfinite(v)) return nullptr;
      }
      return log_log_slope(ns, y);
    };
    ctx.summary["cond4_slope"] = slope(c4);
    ctx.summary["cond4_exact_slope"] = slope(c4x);
    ctx.summary["cond5_slope"] = slope(c5);
  }

  // Score centring at the starting state.
  const MartingaleResidual mr = score_martingale_residual(*built.model, cfg.theta0, cfg.scheme.x0,
                                                          cfg.estimation.martingale_M,
                                                          derive_stream(domain_seed(cfg.seed, kTagMartingale), 0));
  ctx.summary["score_martingale_residual"] = {{"x", cfg.scheme.x0},
                                              {"samples", built.model->is_exact() ? 0 : cfg.estimation.martingale_M},
                                              {"mean", mr.mean},
                                              {"standard_error", mr.standard_error}};

  std::vector<Series> series;
  series.push_back({"cond4 (p = " + format_number(opt.p_exponent) + ")", ns, c4});
  if (std::isfinite(c4x.front())) series.push_back({"cond4 exact", ns, c4x});
  series.push_back({rows.front().cond5_majorant ? "cond5 majorant" : "cond5", ns, c5});
  ctx.out.plot("condition_decay.svg", [&] {
    return line_svg(series, {"condition statistics against n", "n", "value", true, true});
  });
  return kExitOk;
}

// ergodic -------------------------------------------------------------------

int cmd_ergodic(Context& ctx, const BuiltModel& built) {
  const auto& cfg = ctx.config;
  const auto& erg = cfg.ergodics;
  const std::uint64_t eseed = domain_seed(cfg.seed, kTagErgodicPath);

  if (built.sde) {
    const auto& sde = *built.sde;
    CounterStream fine = derive_stream(eseed, 2);
    const Path path = simulate_path(sde.drift(), cfg.theta0, sde.noise(), cfg.scheme.x0, erg.T_list.back(),
                                    sde.dt(), fine);
    const KhasminskiiAverages kappa = khasminskii_average(path, erg.T_list);
    const auto moments = invariant_moments(kappa, erg.p_list, sde.moment_limit());
    ctx.out.csv("khasminskii.csv", {"T", "w1_to_previous"}, [&](CsvWriter& w) {
      for (std::size_t i = 0; i < kappa.horizons.size(); ++i) {
        w.field(kappa.horizons[i]);
        w.field(i == 0 ? std::numeric_limits<double>::quiet_NaN() : kappa.w1_consecutive[i - 1]);
        w.end_row();
      }
    });
    ctx.out.csv("invariant_moments.csv", {"p", "T", "moment"}, [&](CsvWriter& w) {
      for (const auto& row : moments) {
        for (std::size_t i = 0; i < row.by_horizon.size(); ++i) {
          w.field(row.p).field(kappa.horizons[i]).field(row.by_horizon[i]);
          w.end_row();
        }
      }
    });
    json mj = json::array();
    bool stable = true;
    for (const auto& row : moments) {
      mj.push_back({{"p", row.p},
                    {"estimate", row.estimate},
                    {"standard_error", row.standard_error},
                    {"relative_drift", row.relative_drift},
                    {"unstable", row.unstable}});
      stable = stable && !row.unstable;
    }
    ctx.summary["invariant_moments"] = mj;
    ctx.summary["moments_stable"] = stable;
    ctx.summary["w1_consecutive"] = kappa.w1_consecutive;
    std::vector<Series> ms;
    for (const auto& row : moments) ms.push_back({"p = " + format_number(row.p), kappa.horizons, row.by_horizon});
    ctx.out.plot("invariant_moments.svg", [&] {
      return line_svg(ms, {"time-averaged moments against T", "T", "moment", true, true});
    });
  }

  CounterStream path_stream = derive_stream(eseed, 0);
  const DiscreteSample sample = built.model->sample_path(cfg.theta0, cfg.scheme.x0, erg.path_length, path_stream);
  const auto pairs = stationary_pairs(sample, erg.burn_in_fraction, 100);
  const Sigma2Estimate s2 = sigma2_plugin(*built.model, cfg.theta0, pairs, derive_stream(eseed, 1), ctx.executor);
  const LongRunVariance lrv = longrun_variance(s2.scores, erg.batch_lens);
  std::vector<double> stationary_values(sample.values.end() - static_cast<std::ptrdiff_t>(pairs.size() + 1),
                                        sample.values.end());
  const MixingFit mix = mixing_fit(sign_functional(stationary_values), erg.lag_grid);

  ctx.out.csv("batch_means.csv", {"batch_length", "batches", "estimate"}, [&](CsvWriter& w) {
    for (const auto& r : lrv.rows) {
      w.field(r.batch_length).field(r.batches).field(r.estimate);
      w.end_row();
    }
  });
  ctx.out.csv("mixing.csv", {"lag", "autocovariance", "noise_floor", "used"}, [&](CsvWriter& w) {
    for (std::size_t i = 0; i < mix.lags.size(); ++i) {
      const bool used = std::find(mix.lags_used.begin(), mix.lags_used.end(), mix.lags[i]) != mix.lags_used.end();
      w.field(mix.lags[i]).field(mix.autocovariance[i]).field(mix.noise_floor[i]).field(static_cast<long long>(used));
      w.end_row();
    }
  });
  ctx.summary["pairs"] = pairs.size();
  ctx.summary["sigma2_plugin"] = {{"value", s2.value}, {"standard_error", s2.standard_error}};
  ctx.summary["longrun_variance"] = {{"plateau", lrv.plateau},
                                     {"relative_to_sigma2", lrv.plateau / s2.value - 1.0}};
  ctx.summary["mixing"] = {{"C_hat", mix.C_hat},
                           {"c_hat", mix.c_hat},
                           {"residual", mix.residual},
                           {"lags_used", mix.lags_used}};
  if (built.chain) {
    ctx.summary["sigma2_exact"] = exact_sigma2(*built.chain, cfg.theta0);
    if (built.chain->name() == "symmetric_two_state") {
      ctx.summary["mixing"]["reference_rate"] = -std::log(std::fabs(1.0 - 2.0 * cfg.theta0));
    }
  }

  if (!erg.fisher_n_grid.empty()) {
    FisherOptions fo{cfg.lan.fisher_mode, cfg.lan.fisher_R};
    const auto growth = fisher_growth(*built.model, cfg.theta0, cfg.scheme.x0, erg.fisher_n_grid, fo,
                                      domain_seed(cfg.seed, kTagFisherGrowth), ctx.executor);
    ctx.out.csv("fisher_growth.csv", {"n", "fisher_per_step", "standard_error"}, [&](CsvWriter& w) {
      for (const auto& r : growth) {
        w.field(r.n).field(r.per_step).field(r.standard_error);
        w.end_row();
      }
    });
    json gj = json::array();
    Series gs{"I_n / n", {}, {}};
    for (const auto& r : growth) {
      gj.push_back({{"n", r.n},
                    {"per_step", r.per_step},
                    {"standard_error", r.standard_error},
                    {"relative_to_sigma2", r.per_step / s2.value - 1.0}});
      gs.x.push_back(static_cast<double>(r.n));
      gs.y.push_back(r.per_step);
    }
    ctx.summary["fisher_growth"] = gj;
    LinePlotOptions po{"I_n / n against n", "n", "I_n / n", true, false, s2.value};
    ctx.out.plot("fisher_growth.svg", [&] { return line_svg({gs}, po); });
  }
  return kExitOk;
}

// simulate ------------------------------------------------------------------

int cmd_simulate(Context& ctx, const BuiltModel& built) {
  const auto& cfg = ctx.config;
  const double h = cfg.scheme.h;
  DiscreteSample sample;
  if (built.sde) {
    const auto& sde = *built.sde;
    CounterStream rng = derive_stream(domain_seed(cfg.seed, kTagSimulate), 0);
    const Path path = simulate_path(sde.drift(), cfg.theta0, sde.noise(), cfg.scheme.x0,
                                    h * static_cast<double>(cfg.scheme.n), sde.dt(), rng);
    sample = observe(path, {h, cfg.scheme.n, cfg.scheme.x0});
    ctx.out.csv("path.csv", {"t", "x"}, [&](CsvWriter& w) {
      for (std::size_t i = 0; i < path.values.size(); ++i) {
        w.field(path.dt * static_cast<double>(i)).field(path.values[i]);
        w.end_row();
      }
    });
  } else {
    CounterStream rng = derive_stream(domain_seed(cfg.seed, kTagSimulate), 0);
    sample = built.model->sample_path(cfg.theta0, cfg.scheme.x0, cfg.scheme.n, rng);
  }
  ctx.out.csv("observations.csv", {"k", "t", "x"}, [&](CsvWriter& w) {
    for (std::size_t k = 0; k < sample.values.size(); ++k) {
      w.field(k).field(h * static_cast<double>(k)).field(sample.values[k]);
      w.end_row();
    }
  });
  Series s{"X", {}, {}};
  for (std::size_t k = 0; k < sample.values.size(); ++k) {
    s.x.push_back(h * static_cast<double>(k));
    s.y.push_back(sample.values[k]);
  }
  ctx.out.plot("observations.svg", [&] { return line_svg({s}, {"observed path", "t", "X_t"}); });
  ctx.summary["observations"] = sample.size();
  ctx.summary["mean"] = mean(sample.values);
  return kExitOk;
}

// report --------------------------------------------------------------------

CsvTable read_table(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  return read_csv(in);
}

double cell(const CsvTable& t, const std::vector<std::string>& row, const std::string& col) {
  return std::stod(row[t.column(col)]);
}

int cmd_report(Context& ctx) {
  const fs::path dir = ctx.out.dir();
  bool any = false;
  if (fs::exists(dir / "lan_replications.csv")) {
    any = true;
    const CsvTable t = read_table(dir / "lan_replications.csv");
    // Rebuild one LanReport per n from the persisted rows and re-summarize.
    std::map<std::size_t, LanReport> by_n;
    for (const auto& row : t.rows) {
      const auto n = static_cast<std::size_t>(cell(t, row, "n"));
      const auto rep = static_cast<std::size_t>(cell(t, row, "rep"));
      LanReport& r = by_n[n];
      r.n = n;
      const double u = cell(t, row, "u");
      if (std::find(r.u_list.begin(), r.u_list.end(), u) == r.u_list.end()) r.u_list.push_back(u);
      if (r.records.size() <= rep) r.records.resize(rep + 1);
      ReplicationRecord& rec = r.records[rep];
      rec.rep = rep;
      rec.ok = cell(t, row, "ok") != 0.0;
      if (!rec.ok) {
        rec.error = row[t.column("error")];
        continue;
      }
      rec.delta_n = cell(t, row, "delta_n");
      rec.sum_g = cell(t, row, "sum_g");
      rec.sum_g_sq = cell(t, row, "sum_g_sq");
      rec.lan.push_back({u, rec.delta_n, cell(t, row, "log_Z"), cell(t, row, "psi_n")});
      rec.zeta.push_back({cell(t, row, "sum_zeta_sq"), cell(t, row, "max_abs_zeta"),
                          cell(t, row, "sum_abs_zeta_cubed"), cell(t, row, "centered_combo"),
                          cell(t, row, "cond_sum_zeta_sq")});
    }
    std::vector<LanReport> reports;
    json per_n = json::array();
    for (auto& [n, r] : by_n) {
      r.replications = r.records.size();
      r.max_discard_fraction = ctx.config.lan.max_discard_fraction;
      summarize(r);
      json s = lan_summary_json(r);
      s.erase("fisher_information");
      s.erase("fisher_information_se");
      s.erase("rate");
      per_n.push_back(s);
      reports.push_back(std::move(r));
    }
    ctx.summary["lan"] = per_n;
    if (!reports.empty()) write_lan_plots(ctx.out, reports, reports.back().n);
  }
  if (fs::exists(dir / "conditions.csv")) {
    any = true;
    const CsvTable t = read_table(dir / "conditions.csv");
    Series c4{"cond4", {}, {}}, c5{"cond5", {}, {}};
    for (const auto& row : t.rows) {
      const double n = cell(t, row, "n");
      c4.x.push_back(n), c4.y.push_back(cell(t, row, "cond4_mean"));
      c5.x.push_back(n), c5.y.push_back(cell(t, row, "cond5"));
    }
    ctx.out.plot("condition_decay.svg", [&] {
      return line_svg({c4, c5}, {"condition statistics against n", "n", "value", true, true});
    });
  }
  if (fs::exists(dir / "fisher_growth.csv")) {
    any = true;
    const CsvTable t = read_table(dir / "fisher_growth.csv");
    Series s{"I_n / n", {}, {}};
    for (const auto& row : t.rows) {
      s.x.push_back(cell(t, row, "n"));
      s.y.push_back(cell(t, row, "fisher_per_step"));
    }
    ctx.out.plot("fisher_growth.svg", [&] { return line_svg({s}, {"I_n / n against n", "n", "I_n / n", true}); });
  }
  if (!any) throw std::runtime_error("report: no known CSV files in " + dir.string());
  return kExitOk;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"check-h", "check-a",   "chain-oracle", "lan",
                                                 "conditions", "ergodic", "simulate",     "report"};
  return names;
}

RunResult run_command(const std::string& command, ExperimentConfig config, const RunOptions& options) {
  if (std::find(command_names().begin(), command_names().end(), command) == command_names().end()) {
    throw ConfigError("unknown command '" + command + "'");
  }
  if (options.seed) config.seed = *options.seed;
  RunResult result;
  result.out_dir = options.out_dir.empty() ? config.output_dir : options.out_dir;
  Output out(result.out_dir, options.plots);
  const ThreadPoolExecutor executor(options.threads);
  json summary = {{"schema", 1}, {"command", command}, {"seed", config.seed}};
  Context ctx{config, executor, out, summary};

  const auto start = std::chrono::steady_clock::now();
  int code = kExitOk;
  if (command == "report") {
    code = cmd_report(ctx);
  } else {
    const BuiltModel built = build_model(config);
    if (command == "check-h") code = cmd_check_h(ctx, built);
    else if (command == "check-a") code = cmd_check_a(ctx, built);
    else if (command == "chain-oracle") code = cmd_chain_oracle(ctx, built);
    else if (command == "lan") code = cmd_lan(ctx, built);
    else if (command == "conditions") code = cmd_conditions(ctx, built);
    else if (command == "ergodic") code = cmd_ergodic(ctx, built);
    else code = cmd_simulate(ctx, built);
  }
  summary["elapsed_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  summary["exit_code"] = code;
  out.write("summary.json", summary.dump(2) + "\n");

  json files = json::array();
  for (const auto& [name, hash] : out.files()) files.push_back({{"name", name}, {"fnv1a64", hex64(hash)}});
  const json manifest = {{"schema", 1},
                         {"command", command},
                         {"config_hash_fnv1a64", hex64(fnv1a64(config.source))},
                         {"config_bytes", config.source.size()},
                         {"seed", config.seed},
                         {"threads", options.threads},
                         {"files", files}};
  out.write("manifest.json", manifest.dump(2) + "\n");
  for (const auto& f : out.files()) result.files.push_back(f.first);
  result.exit_code = code;
  result.summary = std::move(summary);
  return result;
}

}  // namespace lanlab::harness
