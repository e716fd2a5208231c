#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "lanlab/executor.hpp"
#include "lanlab/lan_analysis.hpp"
#include "lanlab/sde_model.hpp"
#include "lanlab/transition_model.hpp"

namespace lanlab {

/// Atoms with non-negative weights summing to one, support sorted ascending.
struct EmpiricalMeasure {
  std::vector<double> support;
  std::vector<double> weights;
  double total_mass() const;
};

EmpiricalMeasure point_mass(double v);

/// W1 between one-dimensional discrete measures: the integral of |F - G|.
double wasserstein1(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

struct KhasminskiiAverages {
  std::vector<double> horizons;
  std::vector<EmpiricalMeasure> measures;
  /// W1 between consecutive horizons; size horizons - 1.
  std::vector<double> w1_consecutive;
  /// Time-ordered grid values up to each horizon (for moment standard errors).
  std::vector<std::vector<double>> samples;
};

/// Equal-weight time averages of the fine-grid path over [0, T] for every T.
KhasminskiiAverages khasminskii_average(const Path& path, std::span<const double> horizons);

struct InvariantMomentRow {
  double p = 0.0;
  /// Estimate at the largest horizon with a batch-means standard error.
  double estimate = 0.0;
  double standard_error = 0.0;
  /// Estimates at every horizon.
  std::vector<double> by_horizon;
  /// |last - previous| / |previous| between the two largest horizons.
  double relative_drift = 0.0;
  bool unstable = false;
};

std::vector<InvariantMomentRow> invariant_moments(const KhasminskiiAverages& kappa,
                                                  std::span<const double> p_list,
                                                  double moment_limit =
                                                      std::numeric_limits<double>::infinity());

/// Consecutive pairs (X_{k-1}, X_k) after dropping a burn-in of
/// max(fraction * n, min_steps) steps.
std::vector<std::pair<double, double>> stationary_pairs(const DiscreteSample& sample,
                                                        double burn_in_fraction = 0.1,
                                                        std::size_t min_burn_steps = 100);

struct Sigma2Estimate {
  double value = 0.0;
  double standard_error = 0.0;
  /// g(theta0; x, y) along the pairs, in order.
  std::vector<double> scores;
};

/// Mean of g^2 over the pairs; pair k evaluates with stream.derive(k).
Sigma2Estimate sigma2_plugin(const TransitionModel& model, double theta0,
                             std::span<const std::pair<double, double>> pairs,
                             const CounterStream& stream, const Executor& executor = serial_executor());

struct BatchMeansRow {
  std::size_t batch_length = 0;
  std::size_t batches = 0;
  double estimate = 0.0;
};

struct LongRunVariance {
  std::vector<BatchMeansRow> rows;
  /// Median of the per-length estimates.
  double plateau = 0.0;
};

LongRunVariance longrun_variance(std::span<const double> sequence,
                                 std::span<const std::size_t> batch_lengths);

struct MixingFit {
  double C_hat = 0.0;
  /// +infinity when no autocovariance clears the noise floor.
  double c_hat = std::numeric_limits<double>::infinity();
  double residual = 0.0;
  std::vector<std::size_t> lags;
  std::vector<double> autocovariance;
  std::vector<double> noise_floor;
  std::vector<std::size_t> lags_used;
};

/// sign(x - median(x)), with 0 for ties.
std::vector<double> sign_functional(std::span<const double> values);

double autocovariance(std::span<const double> values, std::size_t lag);

/// Least-squares fit of log |gamma(k)| = log C - c k over the leading lags
/// whose autocovariance exceeds three Bartlett standard errors.
MixingFit mixing_fit(std::span<const double> functional, std::span<const std::size_t> lag_grid);

struct FisherGrowthRow {
  std::size_t n = 0;
  double per_step = 0.0;
  double standard_error = 0.0;
};

std::vector<FisherGrowthRow> fisher_growth(const TransitionModel& model, double theta0, double x0,
                                           std::span<const std::size_t> n_grid,
                                           const FisherOptions& options, std::uint64_t seed,
                                           const Executor& executor = serial_executor());

}  // namespace lanlab
