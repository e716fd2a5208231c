#include "lanlab/levy_noise.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "lanlab/errors.hpp"
#include "quadrature.hpp"

namespace lanlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Magnitudes below lower_cutoff_factor * (upper end) are ignored when an
// integral starts at the origin; every integrand used here decays like a
// positive power of r there.
constexpr double kLowerCutoffFactor = 1e-40;

// Exponential tempering makes the tail beyond this many decay lengths
// negligible at double precision for every moment order we integrate.
constexpr double kTailDecayLengths = 300.0;

const TemperedStable* as_tempered(const LevyMeasureSpec& spec) {
  return std::get_if<TemperedStable>(&spec.kind);
}

const TabulatedDensity* as_tabulated(const LevyMeasureSpec& spec) {
  return std::get_if<TabulatedDensity>(&spec.kind);
}

void validate(const LevyMeasureSpec& spec) {
  if (!(spec.u0 > 0.0) || !std::isfinite(spec.u0)) throw InvalidSpec("u0 must be positive");
  if (!std::isfinite(spec.drift_c)) throw InvalidSpec("drift c must be finite");
  if (const auto* ts = as_tempered(spec)) {
    if (!(ts->alpha > 0.0 && ts->alpha < 2.0)) {
      throw InvalidSpec("tempered-stable alpha must lie in (0, 2)");
    }
    if (!(ts->lambda_plus > 0.0) || !(ts->lambda_minus > 0.0)) {
      throw InvalidSpec("tempering rates lambda_+ and lambda_- must be positive");
    }
    if (!(ts->c_plus >= 0.0) || !(ts->c_minus >= 0.0)) {
      throw InvalidSpec("intensities c_+ and c_- must be non-negative");
    }
    return;
  }
  const auto& tab = *as_tabulated(spec);
  if (tab.grid.size() < 2) throw InvalidSpec("tabulated density needs at least two nodes");
  if (tab.values_plus.size() != tab.grid.size() || tab.values_minus.size() != tab.grid.size()) {
    throw InvalidSpec("tabulated density: value arrays must match the grid");
  }
  if (!(tab.grid.front() > 0.0)) throw InvalidSpec("tabulated grid must be positive");
  for (std::size_t i = 1; i < tab.grid.size(); ++i) {
    if (!(tab.grid[i] > tab.grid[i - 1])) {
      throw InvalidSpec("tabulated grid must be strictly increasing");
    }
  }
  if (std::fabs(tab.grid.back() - spec.u0) > 1e-12 * spec.u0) {
    throw InvalidSpec("tabulated grid must end at u0");
  }
  for (const auto& atom : tab.outer_measure) {
    if (!(std::fabs(atom.position) > spec.u0) || !(atom.mass >= 0.0) ||
        !std::isfinite(atom.position) || !std::isfinite(atom.mass)) {
      throw InvalidSpec("outer measure atoms must sit beyond u0 with finite non-negative mass");
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// LevyMeasure

LevyMeasure::LevyMeasure(LevyMeasureSpec spec) : spec_(std::move(spec)) {
  validate(spec_);
  if (const auto* tab = as_tabulated(spec_)) atoms_ = tab->outer_measure;
}

bool LevyMeasure::is_zero() const noexcept {
  if (const auto* ts = as_tempered(spec_)) return ts->c_plus == 0.0 && ts->c_minus == 0.0;
  const auto& tab = *as_tabulated(spec_);
  const bool dense_zero =
      std::all_of(tab.values_plus.begin(), tab.values_plus.end(), [](double v) { return v == 0.0; }) &&
      std::all_of(tab.values_minus.begin(), tab.values_minus.end(), [](double v) { return v == 0.0; });
  const bool atoms_zero =
      std::all_of(atoms_.begin(), atoms_.end(), [](const Atom& a) { return a.mass == 0.0; });
  return dense_zero && atoms_zero;
}

double LevyMeasure::support_limit(int side) const {
  if (const auto* ts = as_tempered(spec_)) {
    const double c = side > 0 ? ts->c_plus : ts->c_minus;
    return c > 0.0 ? kInf : 0.0;
  }
  return spec_.u0;
}

double LevyMeasure::side_density(int side, double r) const {
  if (!(r > 0.0)) return 0.0;
  if (const auto* ts = as_tempered(spec_)) {
    const double c = side > 0 ? ts->c_plus : ts->c_minus;
    const double lambda = side > 0 ? ts->lambda_plus : ts->lambda_minus;
    if (c == 0.0) return 0.0;
    return c * std::pow(r, -1.0 - ts->alpha) * std::exp(-lambda * r);
  }
  const auto& tab = *as_tabulated(spec_);
  const auto& values = side > 0 ? tab.values_plus : tab.values_minus;
  const auto& grid = tab.grid;
  if (r > spec_.u0 * (1.0 + 1e-12)) return 0.0;
  std::size_t k = 0;
  if (r >= grid.front()) {
    k = static_cast<std::size_t>(std::upper_bound(grid.begin(), grid.end(), r) - grid.begin());
    k = std::min(k, grid.size() - 1) - 1;
  }
  const double r0 = grid[k];
  const double r1 = grid[k + 1];
  const double m0 = values[k];
  const double m1 = values[k + 1];
  if (m0 > 0.0 && m1 > 0.0) {
    const double slope = std::log(m1 / m0) / std::log(r1 / r0);
    return m0 * std::pow(r / r0, slope);
  }
  if (r < r0) return m0;
  return m0 + (m1 - m0) * (r - r0) / (r1 - r0);
}

double LevyMeasure::log_slope(int side, double r) const {
  if (const auto* ts = as_tempered(spec_)) {
    const double lambda = side > 0 ? ts->lambda_plus : ts->lambda_minus;
    return -(1.0 + ts->alpha) - lambda * r;
  }
  const auto& tab = *as_tabulated(spec_);
  const auto& values = side > 0 ? tab.values_plus : tab.values_minus;
  const auto& grid = tab.grid;
  std::size_t k = 0;
  if (r >= grid.front()) {
    k = static_cast<std::size_t>(std::upper_bound(grid.begin(), grid.end(), r) - grid.begin());
    k = std::min(k, grid.size() - 1) - 1;
  }
  if (!(values[k] > 0.0 && values[k + 1] > 0.0)) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return std::log(values[k + 1] / values[k]) / std::log(grid[k + 1] / grid[k]);
}

double LevyMeasure::density(double u) const {
  if (u == 0.0) return kInf;
  return side_density(u > 0.0 ? 1 : -1, std::fabs(u));
}

double LevyMeasure::density_derivative(double u) const {
  const int side = u > 0.0 ? 1 : -1;
  const double r = std::fabs(u);
  const double m = side_density(side, r);
  if (m == 0.0) return 0.0;
  // d/du = side * d/dr, and dm/dr = m * slope / r.
  return side * m * log_slope(side, r) / r;
}

double LevyMeasure::density_second_derivative(double u) const {
  const int side = u > 0.0 ? 1 : -1;
  const double r = std::fabs(u);
  const double m = side_density(side, r);
  if (m == 0.0) return 0.0;
  const double k = log_slope(side, r);
  double dk = 0.0;  // r * d(slope)/dr
  if (const auto* ts = as_tempered(spec_)) {
    dk = -(side > 0 ? ts->lambda_plus : ts->lambda_minus) * r;
  }
  return m / (r * r) * (k * k + dk - k);
}

double LevyMeasure::integrate_side(int side, const std::function<double(double)>& f, double lo,
                                   double hi) const {
  double total = 0.0;
  const double limit = support_limit(side);
  const double sign = side > 0 ? 1.0 : -1.0;
  auto integrand = [&](double r) { return f(sign * r) * side_density(side, r); };

  if (limit > 0.0) {
    double upper = std::min(hi, limit);
    if (const auto* ts = as_tempered(spec_)) {
      const double lambda = side > 0 ? ts->lambda_plus : ts->lambda_minus;
      upper = std::min(upper, std::max(lo, 1.0 / lambda) + kTailDecayLengths / lambda);
      const double lower = lo > 0.0 ? lo : upper * kLowerCutoffFactor;
      total += detail::integrate_log_scale(integrand, lower, upper, 1e-13, 25);
    } else {
      const auto& grid = as_tabulated(spec_)->grid;
      const double lower = lo > 0.0 ? lo : grid.front() * kLowerCutoffFactor;
      // Piecewise smooth between nodes: integrate cell by cell.
      std::vector<double> cuts{lower};
      for (double g : grid) {
        if (g > lower && g < upper) cuts.push_back(g);
      }
      cuts.push_back(upper);
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] <= cuts[i]) continue;
        if (cuts[i] < grid.front()) {
          total += detail::integrate_log_scale(integrand, cuts[i], cuts[i + 1], 1e-13, 25);
        } else {
          total += detail::integrate_log_cell(integrand, cuts[i], cuts[i + 1]);
        }
      }
    }
  }
  for (const auto& atom : atoms_) {
    const double r = std::fabs(atom.position);
    if ((atom.position > 0.0) == (side > 0) && r >= lo && r <= hi) {
      total += f(atom.position) * atom.mass;
    }
  }
  return total;
}

double LevyMeasure::integrate(const std::function<double(double)>& f, double lo,
                              double hi) const {
  if (lo < 0.0 || !(hi > lo)) return 0.0;
  return integrate_side(1, f, lo, hi) + integrate_side(-1, f, lo, hi);
}

double LevyMeasure::tail_mass(double eps) const {
  return integrate([](double) { return 1.0; }, eps, kInf);
}

// ---------------------------------------------------------------------------
// LevyNoise

LevyNoise::LevyNoise(LevyMeasureSpec spec, IncrementSamplerConfig cfg)
    : measure_(std::move(spec)), cfg_(cfg) {
  const double u0 = measure_.spec().u0;
  if (!(cfg_.delta_trunc > 0.0) || !(cfg_.delta_trunc < u0)) {
    throw InvalidSpec("truncation level delta must satisfy 0 < delta < u0");
  }
  if (cfg_.table_size < 2) throw InvalidSpec("inverse-CDF table needs at least two nodes");

  plus_ = build_table(1);
  minus_ = build_table(-1);
  for (const auto& atom : measure_.atoms()) {
    atom_mass_ += atom.mass;
    atom_cdf_.push_back(atom_mass_);
  }
  intensity_ = plus_.mass + minus_.mass + atom_mass_;
  if (cfg_.delta_trunc < 1.0) {
    compensator_ = measure_.integrate([](double u) { return u; }, cfg_.delta_trunc, 1.0);
  }
}

LevyNoise::SideTable LevyNoise::build_table(int side) const {
  SideTable table;
  table.side = side;
  const double delta = cfg_.delta_trunc;
  double limit = measure_.support_limit(side);
  if (!(limit > delta)) return table;
  if (const auto* ts = as_tempered(measure_.spec())) {
    const double lambda = side > 0 ? ts->lambda_plus : ts->lambda_minus;
    limit = std::max(10.0 * delta, 50.0 / lambda);
  }
  const std::size_t size = cfg_.table_size;
  table.nodes.resize(size);
  const double log_lo = std::log(delta);
  const double log_hi = std::log(limit);
  for (std::size_t i = 0; i < size; ++i) {
    table.nodes[i] = std::exp(log_lo + (log_hi - log_lo) * static_cast<double>(i) /
                                           static_cast<double>(size - 1));
  }
  table.nodes.front() = delta;
  table.nodes.back() = limit;

  const double sign = side > 0 ? 1.0 : -1.0;
  auto m = [&](double r) { return measure_.density(sign * r); };
  table.cdf.assign(size, 0.0);
  for (std::size_t i = 0; i + 1 < size; ++i) {
    const double r0 = table.nodes[i];
    const double r1 = table.nodes[i + 1];
    table.cdf[i + 1] = table.cdf[i] + detail::integrate_log_cell(m, r0, r1);
  }
  table.mass = table.cdf.back();
  table.guide.resize(size);
  std::size_t cell = 0;
  for (std::size_t g = 0; g < size; ++g) {
    const double level = table.mass * static_cast<double>(g) / static_cast<double>(size);
    while (cell + 2 < size && table.cdf[cell + 1] <= level) ++cell;
    table.guide[g] = static_cast<std::uint32_t>(cell);
  }
  return table;
}

double LevyNoise::sample_side(const SideTable& table, double target) const {
  const double w = target / table.mass;
  const std::size_t cells = table.cdf.size() - 1;
  const auto g = std::min(static_cast<std::size_t>(w * static_cast<double>(table.guide.size())),
                          table.guide.size() - 1);
  std::size_t k = table.guide[g];
  while (k + 1 < cells && table.cdf[k + 1] <= target) ++k;
  const double cell_mass = table.cdf[k + 1] - table.cdf[k];
  const double frac = cell_mass > 0.0 ? std::clamp((target - table.cdf[k]) / cell_mass, 0.0, 1.0)
                                      : 0.5;
  // Linear within a cell; cells are narrow enough on the log grid that the
  // quantile error is far below Monte Carlo resolution.
  const double r = table.nodes[k] + frac * (table.nodes[k + 1] - table.nodes[k]);
  return table.side > 0 ? r : -r;
}

double LevyNoise::sample_jump(CounterStream& rng) const {
  // One uniform picks the side and, rescaled, inverts that side's CDF.
  double pick = rng.uniform() * intensity_;
  if (pick < plus_.mass) return sample_side(plus_, pick);
  pick -= plus_.mass;
  if (pick < minus_.mass || atom_mass_ == 0.0) return sample_side(minus_, std::min(pick, minus_.mass));
  pick -= minus_.mass;
  auto it = std::upper_bound(atom_cdf_.begin(), atom_cdf_.end(), pick);
  const std::size_t k =
      std::min(static_cast<std::size_t>(it - atom_cdf_.begin()), atom_cdf_.size() - 1);
  return measure_.atoms()[k].position;
}

double LevyNoise::sample_increment(double t, CounterStream& rng) const {
  double z = drift_rate() * t;
  if (intensity_ > 0.0) {
    const std::int64_t jumps = rng.poisson(intensity_ * t);
    for (std::int64_t j = 0; j < jumps; ++j) z += sample_jump(rng);
  }
  return z;
}

double sample_increment(const LevyNoise& noise, double t, CounterStream& rng) {
  if (!(t > 0.0)) throw std::invalid_argument("sample_increment: t must be positive");
  return noise.sample_increment(t, rng);
}

// ---------------------------------------------------------------------------
// Condition H

std::span<const double> default_eps_grid() {
  static constexpr std::array<double, 3> grid{1e-1, 1e-2, 1e-3};
  return grid;
}

HReport check_condition_H(const LevyMeasureSpec& spec, double beta,
                          std::span<const double> c0_probe_grid,
                          std::span<const double> eps_grid) {
  if (!(beta > 0.0)) throw std::invalid_argument("check_condition_H: beta must be positive");
  if (c0_probe_grid.empty()) throw std::invalid_argument("check_condition_H: empty probe grid");
  for (double u : c0_probe_grid) {
    if (!(u > 0.0) || u > spec.u0) {
      throw std::invalid_argument("check_condition_H: probe grid must lie in (0, u0]");
    }
  }
  const LevyMeasure measure(spec);
  HReport report;

  const double p = 4.0 + beta;
  report.moment_4_beta =
      measure.integrate([p](double u) { return std::pow(std::fabs(u), p); }, 1.0, kInf);
  if (!std::isfinite(report.moment_4_beta)) {
    throw ConditionHViolation(ConditionHViolation::Part::MomentTail,
                              "H(i): tail moment of order 4+beta is not finite");
  }

  report.min_density = kInf;
  for (double r : c0_probe_grid) {
    for (double u : {r, -r}) {
      const double m = measure.density(u);
      report.min_density = std::min(report.min_density, m);
      if (!(m > 0.0)) {
        std::ostringstream msg;
        msg << "H(ii): density is not positive at u = " << u;
        throw ConditionHViolation(ConditionHViolation::Part::PositiveDensity, msg.str());
      }
      const double first = std::fabs(measure.density_derivative(u)) * r / m;
      const double second = std::fabs(measure.density_second_derivative(u)) * r * r / m;
      report.c0_first = std::max(report.c0_first, first);
      report.c0_second = std::max(report.c0_second, second);
      if (!std::isfinite(first) || !std::isfinite(second)) {
        report.passed = false;
        report.findings.push_back("H(iii): non-finite derivative ratio on the probe grid");
      }
    }
  }

  std::vector<double> eps(eps_grid.begin(), eps_grid.end());
  std::sort(eps.begin(), eps.end(), std::greater<>());
  for (double e : eps) {
    if (!(e > 0.0 && e < 1.0)) throw std::invalid_argument("check_condition_H: eps must be in (0,1)");
    const double scaled = measure.tail_mass(e) / std::log(1.0 / e);
    report.h_iv_values.emplace_back(e, scaled);
    if (!std::isfinite(scaled)) {
      report.passed = false;
      report.findings.push_back("H(iv): non-finite scaled tail mass");
    }
  }
  if (report.h_iv_values.size() >= 2) {
    const auto n = report.h_iv_values.size();
    if (!(report.h_iv_values[n - 1].second > report.h_iv_values[n - 2].second)) {
      report.passed = false;
      report.findings.push_back(
          "H(iv): scaled tail mass is not increasing at the smallest eps");
    }
  }
  return report;
}

double truncation_error(const LevyMeasureSpec& spec, double delta) {
  if (!(delta > 0.0) || !(delta < spec.u0)) {
    throw std::invalid_argument("truncation_error: delta must satisfy 0 < delta < u0");
  }
  const LevyMeasure measure(spec);
  return measure.integrate([](double u) { return u * u; }, 0.0, delta);
}

double choose_truncation(const LevyMeasureSpec& spec, double h, double tol) {
  if (!(h > 0.0) || !(tol > 0.0)) throw std::invalid_argument("choose_truncation: h, tol > 0");
  const double target = tol * h;
  double hi = spec.u0 * (1.0 - 1e-9);
  if (truncation_error(spec, hi) <= target) return hi;
  double lo = spec.u0 * 1e-3;
  while (truncation_error(spec, lo) > target) {
    lo *= 1e-3;
    if (lo < 1e-300) throw InvalidSpec("choose_truncation: no admissible truncation level");
  }
  for (int it = 0; it < 80; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (truncation_error(spec, mid) <= target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace lanlab
