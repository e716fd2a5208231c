#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lanlab/rng.hpp"

namespace lanlab {

/// m(u) = c_+ u^{-1-alpha} e^{-lambda_+ u} for u > 0 and
/// c_- |u|^{-1-alpha} e^{-lambda_- |u|} for u < 0.
struct TemperedStable {
  double alpha = 0.5;
  double lambda_plus = 1.0;
  double lambda_minus = 1.0;
  double c_plus = 1.0;
  double c_minus = 1.0;
};

struct Atom {
  double position = 0.0;
  double mass = 0.0;
};

/// Density tabulated on magnitudes 0 < grid[0] < ... < grid.back() == u0 for
/// both signs, interpolated log-log and extended as a power law below grid[0].
/// The measure beyond u0 is a finite set of atoms.
struct TabulatedDensity {
  std::vector<double> grid;
  std::vector<double> values_plus;
  std::vector<double> values_minus;
  std::vector<Atom> outer_measure;
};

struct LevyMeasureSpec {
  std::variant<TemperedStable, TabulatedDensity> kind = TemperedStable{};
  double drift_c = 0.0;
  double u0 = 1.0;
  /// Tail-moment exponent used by condition H(i) and downstream moment checks.
  double beta = 1.0;
};

struct IncrementSamplerConfig {
  double delta_trunc = 1e-3;
  std::size_t table_size = 4096;
  std::size_t max_jumps_hint = 64;
};

/// Immutable view of the Lévy measure: density, derivatives, and integrals.
class LevyMeasure {
 public:
  explicit LevyMeasure(LevyMeasureSpec spec);

  const LevyMeasureSpec& spec() const noexcept { return spec_; }

  /// Density of the absolutely continuous part at u != 0 (0 outside its domain).
  double density(double u) const;
  double density_derivative(double u) const;
  double density_second_derivative(double u) const;

  /// Integral of f(u) mu(du) over {lo <= |u| <= hi}; hi may be +infinity.
  double integrate(const std::function<double(double)>& f, double lo, double hi) const;

  /// mu({|u| >= eps}).
  double tail_mass(double eps) const;

  /// Largest magnitude carrying absolutely continuous mass on the given side
  /// (+1 or -1); +infinity for tempered-stable sides with c > 0, 0 when empty.
  double support_limit(int side) const;
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  bool is_zero() const noexcept;

 private:
  double side_density(int side, double r) const;
  /// d log m / d log r on the given side at magnitude r.
  double log_slope(int side, double r) const;
  double integrate_side(int side, const std::function<double(double)>& f, double lo,
                        double hi) const;

  LevyMeasureSpec spec_;
  std::vector<Atom> atoms_;
};

/// The driving Lévy process under the small-jump truncation scheme, with
/// precomputed inverse-CDF tables. Immutable after construction.
class LevyNoise {
 public:
  LevyNoise(LevyMeasureSpec spec, IncrementSamplerConfig cfg);

  const LevyMeasure& measure() const noexcept { return measure_; }
  const IncrementSamplerConfig& config() const noexcept { return cfg_; }

  /// mu({|u| >= delta}).
  double jump_intensity() const noexcept { return intensity_; }
  /// int_{delta <= |u| <= 1} u mu(du).
  double compensator() const noexcept { return compensator_; }
  /// Deterministic rate c - compensator.
  double drift_rate() const noexcept { return measure_.spec().drift_c - compensator_; }

  /// One jump from the normalized restriction of mu to {|u| >= delta}.
  double sample_jump(CounterStream& rng) const;
  /// Z_t under the truncated scheme.
  double sample_increment(double t, CounterStream& rng) const;

 private:
  struct SideTable {
    int side = 1;
    std::vector<double> nodes;
    std::vector<double> cdf;
    /// guide[g] = first cell whose upper CDF value exceeds g / guide.size() * mass.
    std::vector<std::uint32_t> guide;
    double mass = 0.0;
  };

  SideTable build_table(int side) const;
  /// Inverse CDF of one side at cumulative mass `target` in [0, mass).
  double sample_side(const SideTable& table, double target) const;

  LevyMeasure measure_;
  IncrementSamplerConfig cfg_;
  double intensity_ = 0.0;
  double compensator_ = 0.0;
  SideTable plus_;
  SideTable minus_;
  std::vector<double> atom_cdf_;
  double atom_mass_ = 0.0;
};

struct HReport {
  double moment_4_beta = 0.0;
  double min_density = 0.0;
  double c0_first = 0.0;
  double c0_second = 0.0;
  std::vector<std::pair<double, double>> h_iv_values;
  bool passed = true;
  std::vector<std::string> findings;
};

/// {1e-1, 1e-2, 1e-3}.
std::span<const double> default_eps_grid();

/// Numerical check of condition H. Throws ConditionHViolation for a
/// non-finite tail moment (part i) or a non-positive density on the probe grid
/// (part ii); H(iii)/H(iv) problems are recorded in the report's findings.
HReport check_condition_H(const LevyMeasureSpec& spec, double beta,
                          std::span<const double> c0_probe_grid,
                          std::span<const double> eps_grid = default_eps_grid());

double sample_increment(const LevyNoise& noise, double t, CounterStream& rng);

/// int_{|u| < delta} u^2 mu(du): variance of the dropped compensated small jumps.
double truncation_error(const LevyMeasureSpec& spec, double delta);

/// Largest delta (below u0) with truncation_error(delta) <= tol * h.
double choose_truncation(const LevyMeasureSpec& spec, double h, double tol = 1e-6);

}  // namespace lanlab
