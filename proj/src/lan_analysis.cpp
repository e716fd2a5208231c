#include "lanlab/lan_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "lanlab/descriptive.hpp"
#include "lanlab/errors.hpp"

namespace lanlab {

namespace {

/// Transition matrix of a counting model over the states listed by its
/// integration nodes at (theta, x0).
struct CountingKernel {
  std::vector<double> states;
  std::vector<double> p;
  std::vector<double> g;

  std::size_t size() const { return states.size(); }
  std::size_t index(double x) const {
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (states[i] == x) return i;
    }
    throw std::invalid_argument("counting model: state not in the support list");
  }
};

void require_counting(const TransitionModel& model, const char* what) {
  if (!model.is_exact() || model.reference_measure() != ReferenceMeasure::Counting) {
    std::ostringstream msg;
    msg << what << ": requires an exact model with counting reference measure";
    throw std::invalid_argument(msg.str());
  }
}

CountingKernel counting_kernel(const TransitionModel& model, double theta, double x0) {
  CountingKernel k;
  for (const auto& node : model.integration_nodes(theta, x0)) k.states.push_back(node.y);
  const std::size_t s = k.size();
  k.p.assign(s * s, 0.0);
  k.g.assign(s * s, 0.0);
  CounterStream unused(0, 0);
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = 0; j < s; ++j) {
      try {
        const TransitionEval e = model.evaluate(theta, k.states[i], k.states[j], {}, unused);
        k.p[i * s + j] = std::exp(e.log_density);
        k.g[i * s + j] = e.score;
      } catch (const ScoreUndefined&) {
        // p = 0: contributes nothing to expectations.
      }
    }
  }
  return k;
}

/// occupation[i] = sum_{k=0}^{n-1} P(X_k = i), one vector per n in the grid.
std::vector<std::vector<double>> occupations(const CountingKernel& k, double x0,
                                             std::span<const std::size_t> n_grid) {
  const std::size_t s = k.size();
  std::vector<double> law(s, 0.0);
  law[k.index(x0)] = 1.0;
  std::vector<double> occ(s, 0.0);
  std::vector<std::vector<double>> out(n_grid.size());
  const std::size_t n_max = n_grid.empty() ? 0 : *std::max_element(n_grid.begin(), n_grid.end());
  for (std::size_t step = 1; step <= n_max; ++step) {
    for (std::size_t i = 0; i < s; ++i) occ[i] += law[i];
    std::vector<double> next(s, 0.0);
    for (std::size_t i = 0; i < s; ++i) {
      for (std::size_t j = 0; j < s; ++j) next[j] += law[i] * k.p[i * s + j];
    }
    law = std::move(next);
    for (std::size_t g = 0; g < n_grid.size(); ++g) {
      if (n_grid[g] == step) {
        out[g] = occ;
      }
    }
  }
  return out;
}

void require_increasing(std::span<const std::size_t> n_grid) {
  if (n_grid.empty()) throw std::invalid_argument("n grid must be non-empty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1 || (i > 0 && n_grid[i] <= n_grid[i - 1])) {
      throw std::invalid_argument("n grid must be strictly increasing positive integers");
    }
  }
}

}  // namespace

std::uint64_t domain_seed(std::uint64_t master_seed, std::uint64_t tag) noexcept {
  return mix64(master_seed ^ mix64(0xA5A5A5A5A5A5A5A5ULL + tag));
}

std::vector<PathScoreRow> path_score_stats(const TransitionModel& model, double theta0, double x0,
                                           std::span<const std::size_t> n_grid, double p_exponent,
                                           std::size_t replications, std::uint64_t seed,
                                           const Executor& executor) {
  require_increasing(n_grid);
  if (replications < 2) throw std::invalid_argument("path_score_stats: need >= 2 paths");
  const std::size_t n_max = n_grid.back();
  const std::size_t cols = n_grid.size();
  // Per path and grid point: sum g^2, sum |g|^p, sum (dg + g^2/2)^2.
  std::vector<double> g2(replications * cols);
  std::vector<double> gp(replications * cols);
  std::vector<double> dq(replications * cols);
  std::vector<char> ok(replications, 1);
  executor.for_each_index(replications, [&](std::size_t r) {
    const CounterStream root = derive_stream(seed, r);
    CounterStream path_stream = root.derive(0);
    const CounterStream eval_stream = root.derive(1);
    try {
      const DiscreteSample sample = model.sample_path(theta0, x0, n_max, path_stream);
      double a = 0.0, b = 0.0, c = 0.0;
      std::size_t col = 0;
      for (std::size_t j = 1; j <= n_max; ++j) {
        CounterStream s = eval_stream.derive(j - 1);
        const TransitionEval e = model.evaluate(theta0, sample.values[j - 1], sample.values[j], {}, s);
        a += e.score * e.score;
        b += std::pow(std::fabs(e.score), p_exponent);
        const double t = e.score_derivative + 0.5 * e.score * e.score;
        c += t * t;
        if (j == n_grid[col]) {
          g2[r * cols + col] = a;
          gp[r * cols + col] = b;
          dq[r * cols + col] = c;
          ++col;
        }
      }
    } catch (const LanlabError&) {
      ok[r] = 0;
    }
  });
  std::vector<PathScoreRow> rows(cols);
  for (std::size_t col = 0; col < cols; ++col) {
    std::vector<double> va, vb, vc;
    for (std::size_t r = 0; r < replications; ++r) {
      if (!ok[r]) continue;
      va.push_back(g2[r * cols + col]);
      vb.push_back(gp[r * cols + col]);
      vc.push_back(dq[r * cols + col]);
    }
    if (va.size() < 2) throw LanlabError("path_score_stats: fewer than two usable paths");
    PathScoreRow& row = rows[col];
    row.n = n_grid[col];
    row.sum_g_sq = mean(va);
    row.sum_g_sq_se = standard_error(va);
    row.sum_abs_g_p = mean(vb);
    row.sum_abs_g_p_se = standard_error(vb);
    row.sum_q_derivative_sq = mean(vc);
  }
  return rows;
}

double exact_fisher_information(const TransitionModel& model, double theta0, double x0,
                                std::size_t n) {
  require_counting(model, "exact_fisher_information");
  if (n < 1) throw std::invalid_argument("exact_fisher_information: n must be >= 1");
  const CountingKernel k = counting_kernel(model, theta0, x0);
  const std::size_t grid[] = {n};
  const std::vector<double> occ = occupations(k, x0, grid)[0];
  const std::size_t s = k.size();
  double total = 0.0;
  for (std::size_t i = 0; i < s; ++i) {
    double info = 0.0;
    for (std::size_t j = 0; j < s; ++j) info += k.p[i * s + j] * k.g[i * s + j] * k.g[i * s + j];
    total += occ[i] * info;
  }
  return total;
}

RateSequence fisher_and_rate(const TransitionModel& model, double theta0, double x0, std::size_t n,
                             const FisherOptions& options, std::uint64_t seed,
                             const Executor& executor) {
  RateSequence out;
  if (options.mode == FisherMode::Exact) {
    out.fisher_information = exact_fisher_information(model, theta0, x0, n);
  } else {
    const std::size_t grid[] = {n};
    const PathScoreRow row =
        path_score_stats(model, theta0, x0, grid, 2.0, options.replications, seed, executor)[0];
    out.fisher_information = row.sum_g_sq;
    out.standard_error = row.sum_g_sq_se;
  }
  if (!(out.fisher_information > 0.0)) {
    std::ostringstream msg;
    msg << "Fisher information I_" << n << " = " << out.fisher_information << " is not positive";
    throw NonpositiveFisher(msg.str());
  }
  out.rate = 1.0 / std::sqrt(out.fisher_information);
  return out;
}

SampleAnalysis analyse_sample(const DiscreteSample& sample, const TransitionModel& model,
                              double theta0, std::span<const double> u_list,
                              const RateSequence& rate, const CounterStream& stream) {
  const std::size_t n = sample.size();
  if (n < 1) throw std::invalid_argument("analyse_sample: sample has no transitions");
  const double r = rate.rate;
  std::vector<double> shifted(u_list.size());
  for (std::size_t k = 0; k < u_list.size(); ++k) {
    shifted[k] = theta0 + r * u_list[k];
    if (!model.theta_interval().contains(shifted[k])) {
      std::ostringstream msg;
      msg << "theta0 + r u = " << shifted[k] << " outside the parameter interval (u = "
          << u_list[k] << ")";
      throw std::invalid_argument(msg.str());
    }
  }
  const bool conditional = model.is_exact() && model.reference_measure() == ReferenceMeasure::Counting;
  // Conditional E[zeta^2 | x] per state, per u.
  std::map<double, std::vector<double>> cond_cache;
  auto conditional_zeta_sq = [&](double x) -> const std::vector<double>& {
    auto it = cond_cache.find(x);
    if (it != cond_cache.end()) return it->second;
    std::vector<double> acc(u_list.size(), 0.0);
    CounterStream unused(0, 0);
    for (const auto& node : model.integration_nodes(theta0, x)) {
      TransitionEval e;
      try {
        e = model.evaluate(theta0, x, node.y, shifted, unused);
      } catch (const ScoreUndefined&) {
        continue;
      }
      const double root0 = std::exp(0.5 * e.log_density);
      for (std::size_t k = 0; k < u_list.size(); ++k) {
        const double d = std::exp(0.5 * e.shifted_log_densities[k]) - root0;
        acc[k] += node.weight * d * d;
      }
    }
    return cond_cache.emplace(x, std::move(acc)).first->second;
  };

  SampleAnalysis out;
  std::vector<double> log_z(u_list.size(), 0.0);
  std::vector<double> sum_zeta(u_list.size(), 0.0);
  out.zeta.assign(u_list.size(), ZetaDiagnostics{});
  if (conditional) {
    for (auto& z : out.zeta) z.cond_sum_zeta_sq = 0.0;
  }
  for (std::size_t j = 1; j <= n; ++j) {
    const double x = sample.values[j - 1];
    const double y = sample.values[j];
    CounterStream s = stream.derive(j - 1);
    const TransitionEval e = model.evaluate(theta0, x, y, shifted, s);
    out.sum_g += e.score;
    out.sum_g_sq += e.score * e.score;
    for (std::size_t k = 0; k < u_list.size(); ++k) {
      const double lr = e.shifted_log_densities[k] - e.log_density;
      if (!std::isfinite(lr)) {
        std::ostringstream msg;
        msg << "zero density at step " << j << " under theta = " << shifted[k];
        throw LikelihoodUndefined(msg.str());
      }
      log_z[k] += lr;
      const double zeta = std::expm1(0.5 * lr);
      ZetaDiagnostics& z = out.zeta[k];
      sum_zeta[k] += zeta;
      z.sum_zeta_sq += zeta * zeta;
      z.max_abs_zeta = std::max(z.max_abs_zeta, std::fabs(zeta));
      z.sum_abs_zeta_cubed += std::fabs(zeta) * zeta * zeta;
    }
    if (conditional) {
      const std::vector<double>& c = conditional_zeta_sq(x);
      for (std::size_t k = 0; k < u_list.size(); ++k) out.zeta[k].cond_sum_zeta_sq += c[k];
    }
  }
  out.delta_n = r * out.sum_g;
  out.lan.resize(u_list.size());
  for (std::size_t k = 0; k < u_list.size(); ++k) {
    const double u = u_list[k];
    out.lan[k] = {u, out.delta_n, log_z[k], log_z[k] - u * out.delta_n + 0.5 * u * u};
    out.zeta[k].centered_combo = 2.0 * sum_zeta[k] - r * u * out.sum_g;
  }
  return out;
}

double delta_n(const DiscreteSample& sample, const TransitionModel& model, double theta0,
               const RateSequence& rate, const CounterStream& stream) {
  return analyse_sample(sample, model, theta0, {}, rate, stream).delta_n;
}

LoglikResult loglik_ratio(const DiscreteSample& sample, const TransitionModel& model,
                          double theta0, double u, const RateSequence& rate,
                          const CounterStream& stream) {
  const double us[] = {u};
  const SampleAnalysis a = analyse_sample(sample, model, theta0, us, rate, stream);
  return {a.lan[0].log_Z, a.lan[0]};
}

ZetaDiagnostics zeta_diagnostics(const DiscreteSample& sample, const TransitionModel& model,
                                 double theta0, double u, const RateSequence& rate,
                                 const CounterStream& stream) {
  const double us[] = {u};
  return analyse_sample(sample, model, theta0, us, rate, stream).zeta[0];
}

std::vector<ConditionRow> condition_stats(const TransitionModel& model, double theta0, double x0,
                                          std::span<const std::size_t> n_grid,
                                          const ConditionOptions& options, std::uint64_t seed,
                                          const Executor& executor) {
  require_increasing(n_grid);
  const double p = options.p_exponent;
  if (!(p > 2.0)) throw std::invalid_argument("condition_stats: p_exponent must exceed 2");
  if (!(p < model.moment_limit())) {
    std::ostringstream msg;
    msg << "condition_stats: p_exponent must be below " << model.moment_limit();
    throw std::invalid_argument(msg.str());
  }
  if (!(options.N_sup > 0.0) || options.v_points < 2) {
    throw std::invalid_argument("condition_stats: need N_sup > 0 and at least two v points");
  }
  const bool exact = model.is_exact() && model.reference_measure() == ReferenceMeasure::Counting;
  const std::vector<PathScoreRow> mc = path_score_stats(
      model, theta0, x0, n_grid, p, options.replications, domain_seed(seed, 2), executor);

  std::vector<ConditionRow> rows(n_grid.size());
  std::vector<std::vector<double>> occ;
  CountingKernel kernel;
  if (exact) {
    kernel = counting_kernel(model, theta0, x0);
    occ = occupations(kernel, x0, n_grid);
  }
  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    ConditionRow& row = rows[g];
    row.n = n_grid[g];
    if (options.fisher.mode == FisherMode::Exact) {
      row.fisher_information = exact_fisher_information(model, theta0, x0, row.n);
    } else {
      row.fisher_information = mc[g].sum_g_sq;
    }
    if (!(row.fisher_information > 0.0)) {
      throw NonpositiveFisher("condition_stats: Fisher information is not positive");
    }
    const double r = 1.0 / std::sqrt(row.fisher_information);
    row.rate = r;
    row.cond3_mean = r * r * mc[g].sum_g_sq;
    row.cond3_se = r * r * mc[g].sum_g_sq_se;
    row.cond4_mean = std::pow(r, p) * mc[g].sum_abs_g_p;
    row.cond4_se = std::pow(r, p) * mc[g].sum_abs_g_p_se;

    if (exact) {
      const std::size_t s = kernel.size();
      double c4 = 0.0;
      for (std::size_t i = 0; i < s; ++i) {
        double inner = 0.0;
        for (std::size_t j = 0; j < s; ++j) {
          inner += kernel.p[i * s + j] * std::pow(std::fabs(kernel.g[i * s + j]), p);
        }
        c4 += occ[g][i] * inner;
      }
      row.cond4_exact = std::pow(r, p) * c4;

      CounterStream unused(0, 0);
      row.cond5 = 0.0;
      for (std::size_t k = 0; k < options.v_points; ++k) {
        const double v = -options.N_sup +
                         2.0 * options.N_sup * static_cast<double>(k) /
                             static_cast<double>(options.v_points - 1);
        const double theta_v = theta0 + r * v;
        if (!model.theta_interval().contains(theta_v)) {
          throw std::invalid_argument("condition_stats: theta0 + r v leaves the parameter interval");
        }
        double total = 0.0;
        for (std::size_t i = 0; i < s; ++i) {
          double d = 0.0;
          for (std::size_t j = 0; j < s; ++j) {
            const double diff = model.sqrt_derivative(theta_v, kernel.states[i], kernel.states[j], unused) -
                                model.sqrt_derivative(theta0, kernel.states[i], kernel.states[j], unused);
            d += diff * diff;
          }
          total += occ[g][i] * d;
        }
        total *= r * r;
        if (total > row.cond5) {
          row.cond5 = total;
          row.cond5_argmax_v = v;
        }
      }
    } else {
      const double rn = r * options.N_sup;
      row.cond5 = r * r * rn * rn / 4.0 * mc[g].sum_q_derivative_sq;
      row.cond5_argmax_v = options.N_sup;
      row.cond5_majorant = true;
    }
  }
  return rows;
}

LanReport lan_experiment(const TransitionModel& model, double theta0, double x0, std::size_t n,
                         std::span<const double> u_list, std::size_t replications,
                         std::uint64_t seed, const LanOptions& options, const Executor& executor) {
  if (replications < 100) throw std::invalid_argument("lan_experiment: R must be >= 100");
  if (n < 1) throw std::invalid_argument("lan_experiment: n must be >= 1");
  LanReport report;
  report.theta0 = theta0;
  report.x0 = x0;
  report.n = n;
  report.replications = replications;
  report.seed = seed;
  report.u_list.assign(u_list.begin(), u_list.end());
  report.max_discard_fraction = options.max_discard_fraction;
  report.rate = fisher_and_rate(model, theta0, x0, n, options.fisher, domain_seed(seed, 1), executor);
  report.records.resize(replications);
  executor.for_each_index(replications, [&](std::size_t i) {
    ReplicationRecord& rec = report.records[i];
    rec.rep = i;
    const CounterStream root = derive_stream(seed, i);
    try {
      CounterStream path_stream = root.derive(0);
      const DiscreteSample sample = model.sample_path(theta0, x0, n, path_stream);
      SampleAnalysis a = analyse_sample(sample, model, theta0, u_list, report.rate, root.derive(1));
      rec.delta_n = a.delta_n;
      rec.sum_g = a.sum_g;
      rec.sum_g_sq = a.sum_g_sq;
      rec.lan = std::move(a.lan);
      rec.zeta = std::move(a.zeta);
    } catch (const LanlabError& e) {
      rec.ok = false;
      rec.error = e.what();
    }
  });
  summarize(report);
  return report;
}

void summarize(LanReport& report) {
  std::vector<double> deltas;
  report.discarded = 0;
  for (const auto& rec : report.records) {
    if (rec.ok) {
      deltas.push_back(rec.delta_n);
    } else {
      ++report.discarded;
    }
  }
  report.fatal = static_cast<double>(report.discarded) >
                 report.max_discard_fraction * static_cast<double>(report.records.size());
  report.psi.clear();
  if (deltas.size() < 2) {
    report.fatal = true;
    return;
  }
  report.delta_mean = mean(deltas);
  report.delta_variance = sample_variance(deltas);
  report.delta_se = standard_error(deltas);
  report.ks = ks_normal(deltas);
  report.ad = ad_normal(deltas);
  for (std::size_t k = 0; k < report.u_list.size(); ++k) {
    std::vector<double> abs_psi, zsq, zmax, zcube, combo, cond;
    for (const auto& rec : report.records) {
      if (!rec.ok) continue;
      abs_psi.push_back(std::fabs(rec.lan[k].psi_n));
      zsq.push_back(rec.zeta[k].sum_zeta_sq);
      zmax.push_back(rec.zeta[k].max_abs_zeta);
      zcube.push_back(rec.zeta[k].sum_abs_zeta_cubed);
      combo.push_back(rec.zeta[k].centered_combo);
      cond.push_back(rec.zeta[k].cond_sum_zeta_sq);
    }
    PsiSummary s;
    s.u = report.u_list[k];
    s.mean_abs_psi = mean(abs_psi);
    s.median_abs_psi = median(abs_psi);
    s.q90_abs_psi = quantile(abs_psi, 0.9);
    s.median_sum_zeta_sq = median(zsq);
    s.median_max_abs_zeta = median(zmax);
    s.median_sum_abs_zeta_cubed = median(zcube);
    s.median_centered_combo = median(combo);
    if (std::isfinite(cond.front())) s.median_cond_sum_zeta_sq = median(cond);
    report.psi.push_back(s);
  }
}

}  // namespace lanlab
