#include "lanlab/ergodics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "lanlab/descriptive.hpp"

namespace lanlab {

double EmpiricalMeasure::total_mass() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

EmpiricalMeasure point_mass(double v) { return {{v}, {1.0}}; }

double wasserstein1(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  if (a.support.empty() || b.support.empty()) throw std::invalid_argument("wasserstein1: empty measure");
  std::size_t i = 0, j = 0;
  double fa = 0.0, fb = 0.0;
  double x = std::min(a.support.front(), b.support.front());
  double total = 0.0;
  while (i < a.support.size() || j < b.support.size()) {
    const double next_a = i < a.support.size() ? a.support[i] : std::numeric_limits<double>::infinity();
    const double next_b = j < b.support.size() ? b.support[j] : std::numeric_limits<double>::infinity();
    const double next = std::min(next_a, next_b);
    total += std::fabs(fa - fb) * (next - x);
    x = next;
    while (i < a.support.size() && a.support[i] == next) fa += a.weights[i++];
    while (j < b.support.size() && b.support[j] == next) fb += b.weights[j++];
  }
  return total;
}

namespace {

EmpiricalMeasure equal_weights(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  EmpiricalMeasure m;
  const double w = 1.0 / static_cast<double>(values.size());
  for (double v : values) {
    if (!m.support.empty() && m.support.back() == v) {
      m.weights.back() += w;
    } else {
      m.support.push_back(v);
      m.weights.push_back(w);
    }
  }
  return m;
}

/// Batch-means standard error of the mean of a time-ordered sequence.
double batch_means_se(std::span<const double> x, std::size_t batches = 20) {
  if (x.size() < 2 * batches) return standard_error(x);
  const std::size_t len = x.size() / batches;
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b) means[b] = mean(x.subspan(b * len, len));
  return standard_error(means);
}

}  // namespace

KhasminskiiAverages khasminskii_average(const Path& path, std::span<const double> horizons) {
  if (horizons.empty()) throw std::invalid_argument("khasminskii_average: empty horizon list");
  if (!(path.dt > 0.0) || path.values.empty()) throw std::invalid_argument("khasminskii_average: empty path");
  const double covered = path.dt * static_cast<double>(path.values.size() - 1);
  KhasminskiiAverages out;
  for (double T : horizons) {
    if (!(T > 0.0) || T > covered * (1.0 + 1e-12)) {
      throw std::invalid_argument("khasminskii_average: path does not cover the horizon");
    }
    // Left-point rule on the grid: the values at t_0, ..., t_{m-1} with m dt = T.
    const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(T / path.dt)));
    std::vector<double> values(path.values.begin(), path.values.begin() + static_cast<std::ptrdiff_t>(m));
    out.horizons.push_back(T);
    out.measures.push_back(equal_weights(values));
    out.samples.push_back(std::move(values));
  }
  for (std::size_t i = 1; i < out.measures.size(); ++i) {
    out.w1_consecutive.push_back(wasserstein1(out.measures[i - 1], out.measures[i]));
  }
  return out;
}

std::vector<InvariantMomentRow> invariant_moments(const KhasminskiiAverages& kappa,
                                                  std::span<const double> p_list,
                                                  double moment_limit) {
  if (kappa.measures.empty()) throw std::invalid_argument("invariant_moments: no horizons");
  std::vector<InvariantMomentRow> rows;
  for (double p : p_list) {
    if (!(p > 0.0 && p < moment_limit)) {
      throw std::invalid_argument("invariant_moments: p outside (0, 4 + beta)");
    }
    InvariantMomentRow row;
    row.p = p;
    for (const auto& m : kappa.measures) {
      double s = 0.0;
      for (std::size_t i = 0; i < m.support.size(); ++i) s += m.weights[i] * std::pow(std::fabs(m.support[i]), p);
      row.by_horizon.push_back(s);
    }
    row.estimate = row.by_horizon.back();
    std::vector<double> powered;
    powered.reserve(kappa.samples.back().size());
    for (double v : kappa.samples.back()) powered.push_back(std::pow(std::fabs(v), p));
    row.standard_error = batch_means_se(powered);
    if (row.by_horizon.size() >= 2) {
      const double prev = row.by_horizon[row.by_horizon.size() - 2];
      const double denom = std::fabs(prev);
      row.relative_drift = denom > 0.0 ? std::fabs(row.estimate - prev) / denom
                                       : (row.estimate == prev ? 0.0 : std::numeric_limits<double>::infinity());
      row.unstable = row.relative_drift > 0.2;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::pair<double, double>> stationary_pairs(const DiscreteSample& sample,
                                                        double burn_in_fraction,
                                                        std::size_t min_burn_steps) {
  const std::size_t n = sample.size();
  const auto burn = std::max(min_burn_steps,
                             static_cast<std::size_t>(std::ceil(burn_in_fraction * static_cast<double>(n))));
  if (burn + 1 > n) throw std::invalid_argument("stationary_pairs: sample shorter than the burn-in");
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(n - burn);
  for (std::size_t k = burn + 1; k <= n; ++k) pairs.emplace_back(sample.values[k - 1], sample.values[k]);
  return pairs;
}

Sigma2Estimate sigma2_plugin(const TransitionModel& model, double theta0,
                             std::span<const std::pair<double, double>> pairs,
                             const CounterStream& stream, const Executor& executor) {
  if (pairs.size() < 2) throw std::invalid_argument("sigma2_plugin: need at least two pairs");
  Sigma2Estimate out;
  out.scores.resize(pairs.size());
  executor.for_each_index(pairs.size(), [&](std::size_t k) {
    CounterStream s = stream.derive(k);
    out.scores[k] = model.evaluate(theta0, pairs[k].first, pairs[k].second, {}, s).score;
  });
  std::vector<double> sq(out.scores.size());
  for (std::size_t k = 0; k < sq.size(); ++k) sq[k] = out.scores[k] * out.scores[k];
  out.value = mean(sq);
  out.standard_error = batch_means_se(sq);
  return out;
}

LongRunVariance longrun_variance(std::span<const double> sequence,
                                 std::span<const std::size_t> batch_lengths) {
  if (batch_lengths.empty()) throw std::invalid_argument("longrun_variance: no batch lengths");
  const std::size_t max_len = *std::max_element(batch_lengths.begin(), batch_lengths.end());
  if (batch_lengths.front() == 0 || *std::min_element(batch_lengths.begin(), batch_lengths.end()) == 0) {
    throw std::invalid_argument("longrun_variance: batch lengths must be positive");
  }
  if (sequence.size() < 100 * max_len) {
    throw std::invalid_argument("longrun_variance: sequence shorter than 100 x max batch length");
  }
  LongRunVariance out;
  std::vector<double> estimates;
  for (std::size_t len : batch_lengths) {
    const std::size_t batches = sequence.size() / len;
    std::vector<double> means(batches);
    for (std::size_t b = 0; b < batches; ++b) means[b] = mean(sequence.subspan(b * len, len));
    const double est = static_cast<double>(len) * sample_variance(means);
    out.rows.push_back({len, batches, est});
    estimates.push_back(est);
  }
  out.plateau = median(estimates);
  return out;
}

std::vector<double> sign_functional(std::span<const double> values) {
  const double med = median(values);
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = values[i] > med ? 1.0 : (values[i] < med ? -1.0 : 0.0);
  }
  return out;
}

double autocovariance(std::span<const double> values, std::size_t lag) {
  if (lag >= values.size()) throw std::invalid_argument("autocovariance: lag too large");
  const double m = mean(values);
  double s = 0.0;
  for (std::size_t t = 0; t + lag < values.size(); ++t) s += (values[t] - m) * (values[t + lag] - m);
  return s / static_cast<double>(values.size());
}

MixingFit mixing_fit(std::span<const double> functional, std::span<const std::size_t> lag_grid) {
  const std::size_t n = functional.size();
  if (lag_grid.empty()) throw std::invalid_argument("mixing_fit: empty lag grid");
  for (std::size_t lag : lag_grid) {
    if (lag < 1 || lag > n / 10) throw std::invalid_argument("mixing_fit: lags must lie in [1, length / 10]");
  }
  MixingFit fit;
  const double gamma0 = autocovariance(functional, 0);
  const std::size_t max_lag = *std::max_element(lag_grid.begin(), lag_grid.end());
  // Autocorrelations up to max_lag for the Bartlett variance.
  std::vector<double> rho(max_lag + 1, 0.0);
  if (gamma0 > 0.0) {
    for (std::size_t k = 1; k <= max_lag; ++k) rho[k] = autocovariance(functional, k) / gamma0;
  }
  bool leading = true;
  std::vector<double> xs, ys;
  for (std::size_t lag : lag_grid) {
    double bartlett = 1.0;
    for (std::size_t j = 1; j < lag; ++j) bartlett += 2.0 * rho[j] * rho[j];
    const double floor = 3.0 * gamma0 * std::sqrt(bartlett / static_cast<double>(n));
    const double gamma = gamma0 > 0.0 ? rho[lag] * gamma0 : 0.0;
    fit.lags.push_back(lag);
    fit.autocovariance.push_back(gamma);
    fit.noise_floor.push_back(floor);
    if (leading && std::fabs(gamma) > floor && gamma0 > 0.0) {
      fit.lags_used.push_back(lag);
      xs.push_back(static_cast<double>(lag));
      ys.push_back(std::log(std::fabs(gamma)));
    } else {
      leading = false;
    }
  }
  if (xs.empty()) return fit;
  if (xs.size() == 1) {
    // One resolvable lag: anchor the line at lag 0.
    xs.insert(xs.begin(), 0.0);
    ys.insert(ys.begin(), std::log(gamma0));
  }
  const LineFit line = fit_line(xs, ys);
  fit.C_hat = std::exp(line.intercept);
  fit.c_hat = -line.slope;
  fit.residual = line.residual;
  return fit;
}

std::vector<FisherGrowthRow> fisher_growth(const TransitionModel& model, double theta0, double x0,
                                           std::span<const std::size_t> n_grid,
                                           const FisherOptions& options, std::uint64_t seed,
                                           const Executor& executor) {
  std::vector<FisherGrowthRow> rows;
  if (options.mode == FisherMode::Exact) {
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
      if (n_grid[i] < 1 || (i > 0 && n_grid[i] <= n_grid[i - 1])) {
        throw std::invalid_argument("fisher_growth: n grid must be increasing");
      }
      const double info = exact_fisher_information(model, theta0, x0, n_grid[i]);
      rows.push_back({n_grid[i], info / static_cast<double>(n_grid[i]), 0.0});
    }
    return rows;
  }
  for (const PathScoreRow& r :
       path_score_stats(model, theta0, x0, n_grid, 2.0, options.replications, seed, executor)) {
    const double n = static_cast<double>(r.n);
    rows.push_back({r.n, r.sum_g_sq / n, r.sum_g_sq_se / n});
  }
  return rows;
}

}  // namespace lanlab
