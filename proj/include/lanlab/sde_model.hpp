#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lanlab/levy_noise.hpp"
#include "lanlab/rng.hpp"

namespace lanlab {

/// Open parameter interval (lo, hi).
struct ParameterInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double theta) const noexcept { return theta > lo && theta < hi; }
  bool contains_closed(double theta) const noexcept { return theta >= lo && theta <= hi; }
};

/// Parametric drift a_theta(x) with its partial derivatives.
///
/// Only `value` is mandatory; the default derivative evaluators use central
/// differences, which custom families may override with closed forms.
class DriftFamily {
 public:
  DriftFamily(ParameterInterval theta_interval, ParameterInterval theta_window);
  virtual ~DriftFamily() = default;

  virtual std::string name() const = 0;
  virtual double value(double theta, double x) const = 0;

  virtual double d_x(double theta, double x) const;
  virtual double d_theta(double theta, double x) const;
  virtual double d_xx(double theta, double x) const;
  virtual double d_xtheta(double theta, double x) const;
  virtual double d_thetatheta(double theta, double x) const;

  /// x <- x + a_theta(x) dt for every state.
  virtual void euler_step(double theta, double dt, std::span<double> states) const;

  const ParameterInterval& theta_interval() const noexcept { return theta_interval_; }
  const ParameterInterval& theta_window() const noexcept { return theta_window_; }

 private:
  ParameterInterval theta_interval_;
  ParameterInterval theta_window_;
};

/// a_theta(x) = -theta x + b0.
class AffineDrift final : public DriftFamily {
 public:
  AffineDrift(double b0, ParameterInterval interval, ParameterInterval window);
  std::string name() const override { return "affine"; }
  double value(double theta, double x) const override { return -theta * x + b0_; }
  double d_x(double theta, double) const override { return -theta; }
  double d_theta(double, double x) const override { return -x; }
  double d_xx(double, double) const override { return 0.0; }
  double d_xtheta(double, double) const override { return -1.0; }
  double d_thetatheta(double, double) const override { return 0.0; }
  void euler_step(double theta, double dt, std::span<double> states) const override;

 private:
  double b0_;
};

/// a_theta(x) = -theta x + sin(x).
class SinePerturbedDrift final : public DriftFamily {
 public:
  SinePerturbedDrift(ParameterInterval interval, ParameterInterval window);
  std::string name() const override { return "sine_perturbed"; }
  double value(double theta, double x) const override;
  double d_x(double theta, double x) const override;
  double d_theta(double, double x) const override { return -x; }
  double d_xx(double, double x) const override;
  double d_xtheta(double, double) const override { return -1.0; }
  double d_thetatheta(double, double) const override { return 0.0; }
};

/// Drift given by an arbitrary callable; derivatives by central differences.
class FunctionDrift final : public DriftFamily {
 public:
  using Fn = std::function<double(double theta, double x)>;
  FunctionDrift(std::string name, Fn fn, ParameterInterval interval, ParameterInterval window);
  std::string name() const override { return name_; }
  double value(double theta, double x) const override { return fn_(theta, x); }

 private:
  std::string name_;
  Fn fn_;
};

struct ObservationScheme {
  double h = 0.5;
  std::size_t n = 1;
  double x0 = 0.0;
};

/// X_0, X_h, ..., X_{nh}.
struct DiscreteSample {
  std::vector<double> values;
  std::size_t size() const noexcept { return values.empty() ? 0 : values.size() - 1; }
};

/// Fine-grid path with constant step.
struct Path {
  double dt = 0.0;
  std::vector<double> values;
};

struct AReport {
  double growth_constant = 0.0;
  double dissipativity_margin = 0.0;
  double margin_x = 0.0;
  double margin_theta = 0.0;
};

/// Condition A on finite grids. Throws ConditionAViolation when a_theta(x)/x
/// is not negative for some |x| >= radius.
AReport check_condition_A(const DriftFamily& drift, std::span<const double> x_grid,
                          std::span<const double> theta_grid, double radius = 1.0);

enum class JumpTiming {
  /// All jumps of a cell are applied at the end of the cell.
  Lumped,
  /// Jumps are applied at their arrival times, drift integrated between them.
  ExactArrival,
};

Path simulate_path(const DriftFamily& drift, double theta, const LevyNoise& noise, double x0,
                   double t_end, double dt, CounterStream& rng,
                   JumpTiming timing = JumpTiming::Lumped);

DiscreteSample observe(const Path& path, const ObservationScheme& scheme);

/// Per-cell noise increments for a batch of one-step simulations over [0, h].
/// Replaying the same tape at different theta gives common random numbers.
class NoiseTape {
 public:
  static NoiseTape record(const LevyNoise& noise, double h, double dt, std::size_t samples,
                          CounterStream& rng);

  std::size_t samples() const noexcept { return samples_; }
  std::size_t cells() const noexcept { return cells_; }
  double dt() const noexcept { return dt_; }
  /// Increments of every sample during cell k.
  std::span<const double> cell(std::size_t k) const noexcept {
    return {increments_.data() + k * samples_, samples_};
  }

 private:
  std::size_t samples_ = 0;
  std::size_t cells_ = 0;
  double dt_ = 0.0;
  std::vector<double> increments_;
};

/// Number of Euler cells of width ~dt covering [0, h].
std::size_t cells_per_step(double h, double dt);

/// X_h for every tape sample started at x.
void replay_endpoints(const DriftFamily& drift, double theta, double x, const NoiseTape& tape,
                      std::span<double> out);

std::vector<double> simulate_endpoints(const DriftFamily& drift, double theta,
                                       const LevyNoise& noise, double x, double h,
                                       std::size_t samples, double dt, CounterStream& rng,
                                       const NoiseTape* shared_noise = nullptr);

struct MomentRow {
  double t = 0.0;
  double mean = 0.0;
  double standard_error = 0.0;
};

struct MomentTable {
  std::vector<MomentRow> rows;
  /// sup_t E|X_t|^p / (1 + |x0|^p).
  double implied_constant = 0.0;
};

MomentTable moment_check(const DriftFamily& drift, double theta, const LevyNoise& noise,
                         double x0, double p, std::span<const double> t_grid, std::size_t paths,
                         double dt, CounterStream& rng);

}  // namespace lanlab
