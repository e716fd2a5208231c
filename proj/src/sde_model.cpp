#include "lanlab/sde_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "lanlab/errors.hpp"

namespace lanlab {

namespace {

double fd_step(double v) { return 1e-4 * std::max(1.0, std::fabs(v)); }

void check_finite(double x, double t) {
  if (!std::isfinite(x)) {
    std::ostringstream msg;
    msg << "state became non-finite at t = " << t;
    throw NumericalBlowup(t, msg.str());
  }
}

}  // namespace

DriftFamily::DriftFamily(ParameterInterval theta_interval, ParameterInterval theta_window)
    : theta_interval_(theta_interval), theta_window_(theta_window) {
  if (!(theta_interval_.hi > theta_interval_.lo)) {
    throw InvalidSpec("drift: empty parameter interval");
  }
  if (!(theta_window_.lo >= theta_interval_.lo && theta_window_.hi <= theta_interval_.hi &&
        theta_window_.hi > theta_window_.lo)) {
    throw InvalidSpec("drift: theta window must be a non-empty subinterval of the parameter set");
  }
}

double DriftFamily::d_x(double theta, double x) const {
  const double e = fd_step(x);
  return (value(theta, x + e) - value(theta, x - e)) / (2.0 * e);
}

double DriftFamily::d_theta(double theta, double x) const {
  const double e = fd_step(theta);
  return (value(theta + e, x) - value(theta - e, x)) / (2.0 * e);
}

double DriftFamily::d_xx(double theta, double x) const {
  const double e = 1e2 * fd_step(x);
  return (value(theta, x + e) - 2.0 * value(theta, x) + value(theta, x - e)) / (e * e);
}

double DriftFamily::d_xtheta(double theta, double x) const {
  const double e = fd_step(theta);
  return (d_x(theta + e, x) - d_x(theta - e, x)) / (2.0 * e);
}

double DriftFamily::d_thetatheta(double theta, double x) const {
  const double e = 1e2 * fd_step(theta);
  return (value(theta + e, x) - 2.0 * value(theta, x) + value(theta - e, x)) / (e * e);
}

void DriftFamily::euler_step(double theta, double dt, std::span<double> states) const {
  for (double& x : states) x += value(theta, x) * dt;
}

AffineDrift::AffineDrift(double b0, ParameterInterval interval, ParameterInterval window)
    : DriftFamily(interval, window), b0_(b0) {}

void AffineDrift::euler_step(double theta, double dt, std::span<double> states) const {
  const double keep = 1.0 - theta * dt;
  const double shift = b0_ * dt;
  for (double& x : states) x = x * keep + shift;
}

SinePerturbedDrift::SinePerturbedDrift(ParameterInterval interval, ParameterInterval window)
    : DriftFamily(interval, window) {}

double SinePerturbedDrift::value(double theta, double x) const { return -theta * x + std::sin(x); }
double SinePerturbedDrift::d_x(double theta, double x) const { return -theta + std::cos(x); }
double SinePerturbedDrift::d_xx(double, double x) const { return -std::sin(x); }

FunctionDrift::FunctionDrift(std::string name, Fn fn, ParameterInterval interval,
                             ParameterInterval window)
    : DriftFamily(interval, window), name_(std::move(name)), fn_(std::move(fn)) {}

// ---------------------------------------------------------------------------

AReport check_condition_A(const DriftFamily& drift, std::span<const double> x_grid,
                          std::span<const double> theta_grid, double radius) {
  if (x_grid.empty() || theta_grid.empty()) {
    throw std::invalid_argument("check_condition_A: grids must be non-empty");
  }
  for (double theta : theta_grid) {
    if (!drift.theta_window().contains_closed(theta)) {
      throw std::invalid_argument("check_condition_A: theta grid must lie in the theta window");
    }
  }
  AReport report;
  report.dissipativity_margin = -std::numeric_limits<double>::infinity();
  bool any_outer = false;
  for (double theta : theta_grid) {
    for (double x : x_grid) {
      const double growth = (std::fabs(drift.value(theta, x)) + std::fabs(drift.d_theta(theta, x)) +
                             std::fabs(drift.d_thetatheta(theta, x))) /
                            (1.0 + std::fabs(x));
      report.growth_constant = std::max(report.growth_constant, growth);
      if (std::fabs(x) >= radius) {
        any_outer = true;
        const double ratio = drift.value(theta, x) / x;
        if (ratio > report.dissipativity_margin) {
          report.dissipativity_margin = ratio;
          report.margin_x = x;
          report.margin_theta = theta;
        }
      }
    }
  }
  if (!any_outer) {
    throw std::invalid_argument("check_condition_A: x grid has no point with |x| >= radius");
  }
  if (!(report.dissipativity_margin < 0.0)) {
    std::ostringstream msg;
    msg << "A(ii): a_theta(x)/x = " << report.dissipativity_margin << " >= 0 at x = "
        << report.margin_x << ", theta = " << report.margin_theta;
    throw ConditionAViolation(report.margin_x, report.margin_theta, msg.str());
  }
  return report;
}

Path simulate_path(const DriftFamily& drift, double theta, const LevyNoise& noise, double x0,
                   double t_end, double dt, CounterStream& rng, JumpTiming timing) {
  if (!(dt > 0.0)) throw std::invalid_argument("simulate_path: dt must be positive");
  if (!(t_end >= 0.0)) throw std::invalid_argument("simulate_path: t_end must be non-negative");
  if (!drift.theta_interval().contains(theta)) {
    throw std::invalid_argument("simulate_path: theta outside the parameter interval");
  }
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  Path path;
  path.dt = dt;
  path.values.resize(steps + 1);
  path.values[0] = x0;
  double x = x0;
  const double rate = noise.jump_intensity();
  std::vector<double> arrivals;
  for (std::size_t k = 0; k < steps; ++k) {
    if (timing == JumpTiming::Lumped) {
      x += drift.value(theta, x) * dt + noise.sample_increment(dt, rng);
    } else {
      const std::int64_t jumps = rate > 0.0 ? rng.poisson(rate * dt) : 0;
      arrivals.resize(static_cast<std::size_t>(jumps));
      for (double& a : arrivals) a = rng.uniform() * dt;
      std::sort(arrivals.begin(), arrivals.end());
      double s = 0.0;
      for (double a : arrivals) {
        x += (drift.value(theta, x) + noise.drift_rate()) * (a - s) + noise.sample_jump(rng);
        s = a;
      }
      x += (drift.value(theta, x) + noise.drift_rate()) * (dt - s);
    }
    check_finite(x, static_cast<double>(k + 1) * dt);
    path.values[k + 1] = x;
  }
  return path;
}

DiscreteSample observe(const Path& path, const ObservationScheme& scheme) {
  if (!(scheme.h > 0.0) || scheme.n < 1) throw InvalidScheme("observe: need h > 0 and n >= 1");
  if (!(path.dt > 0.0)) throw InvalidScheme("observe: path has no time step");
  const double ratio = scheme.h / path.dt;
  const auto stride = static_cast<std::size_t>(std::llround(ratio));
  if (stride < 1 || std::fabs(static_cast<double>(stride) - ratio) > 1e-9 * ratio) {
    throw InvalidScheme("observe: h is not a multiple of the path step");
  }
  if (path.values.size() < scheme.n * stride + 1) {
    throw InvalidScheme("observe: path does not cover [0, n h]");
  }
  DiscreteSample sample;
  sample.values.resize(scheme.n + 1);
  for (std::size_t k = 0; k <= scheme.n; ++k) sample.values[k] = path.values[k * stride];
  return sample;
}

std::size_t cells_per_step(double h, double dt) {
  if (!(h > 0.0) || !(dt > 0.0)) throw std::invalid_argument("cells_per_step: h, dt > 0");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(h / dt)));
}

NoiseTape NoiseTape::record(const LevyNoise& noise, double h, double dt, std::size_t samples,
                            CounterStream& rng) {
  if (samples < 1) throw std::invalid_argument("NoiseTape: need at least one sample");
  NoiseTape tape;
  tape.samples_ = samples;
  tape.cells_ = cells_per_step(h, dt);
  tape.dt_ = h / static_cast<double>(tape.cells_);
  tape.increments_.assign(tape.samples_ * tape.cells_, noise.drift_rate() * tape.dt_);
  const double mean_jumps = noise.jump_intensity() * h * static_cast<double>(samples);
  if (mean_jumps > 0.0) {
    // One Poisson total scattered uniformly over the (cell, sample) slots has
    // the same law as independent Poisson counts per slot.
    const std::int64_t jumps = rng.poisson(mean_jumps);
    const std::uint64_t slots = tape.increments_.size();
    for (std::int64_t j = 0; j < jumps; ++j) {
      tape.increments_[rng.below(slots)] += noise.sample_jump(rng);
    }
  }
  return tape;
}

void replay_endpoints(const DriftFamily& drift, double theta, double x, const NoiseTape& tape,
                      std::span<double> out) {
  if (out.size() != tape.samples()) {
    throw std::invalid_argument("replay_endpoints: output size must equal tape samples");
  }
  std::fill(out.begin(), out.end(), x);
  const double dt = tape.dt();
  for (std::size_t k = 0; k < tape.cells(); ++k) {
    drift.euler_step(theta, dt, out);
    const auto inc = tape.cell(k);
    for (std::size_t m = 0; m < out.size(); ++m) out[m] += inc[m];
  }
  for (double v : out) check_finite(v, tape.dt() * static_cast<double>(tape.cells()));
}

std::vector<double> simulate_endpoints(const DriftFamily& drift, double theta,
                                       const LevyNoise& noise, double x, double h,
                                       std::size_t samples, double dt, CounterStream& rng,
                                       const NoiseTape* shared_noise) {
  if (samples < 1) throw std::invalid_argument("simulate_endpoints: need at least one sample");
  if (!drift.theta_interval().contains(theta)) {
    throw std::invalid_argument("simulate_endpoints: theta outside the parameter interval");
  }
  std::vector<double> out(samples);
  if (shared_noise != nullptr) {
    replay_endpoints(drift, theta, x, *shared_noise, out);
  } else {
    const NoiseTape tape = NoiseTape::record(noise, h, dt, samples, rng);
    replay_endpoints(drift, theta, x, tape, out);
  }
  return out;
}

MomentTable moment_check(const DriftFamily& drift, double theta, const LevyNoise& noise,
                         double x0, double p, std::span<const double> t_grid, std::size_t paths,
                         double dt, CounterStream& rng) {
  const double beta = noise.measure().spec().beta;
  if (!(p > 2.0 && p < 4.0 + beta)) {
    throw std::invalid_argument("moment_check: p must lie in (2, 4 + beta)");
  }
  if (t_grid.empty() || paths < 2) {
    throw std::invalid_argument("moment_check: need a time grid and at least two paths");
  }
  const double t_max = *std::max_element(t_grid.begin(), t_grid.end());
  std::vector<double> sum(t_grid.size(), 0.0);
  std::vector<double> sum_sq(t_grid.size(), 0.0);
  for (std::size_t r = 0; r < paths; ++r) {
    CounterStream stream = rng.derive(r);
    const Path path = simulate_path(drift, theta, noise, x0, t_max, dt, stream);
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      const auto k = std::min(path.values.size() - 1,
                              static_cast<std::size_t>(std::llround(t_grid[i] / dt)));
      const double v = std::pow(std::fabs(path.values[k]), p);
      sum[i] += v;
      sum_sq[i] += v * v;
    }
  }
  MomentTable table;
  const double count = static_cast<double>(paths);
  const double scale = 1.0 + std::pow(std::fabs(x0), p);
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double mean = sum[i] / count;
    const double var = std::max(0.0, (sum_sq[i] - count * mean * mean) / (count - 1.0));
    table.rows.push_back({t_grid[i], mean, std::sqrt(var / count)});
    table.implied_constant = std::max(table.implied_constant, mean / scale);
  }
  return table;
}

}  // namespace lanlab
