#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "lanlab/executor.hpp"
#include "lanlab/goodness_of_fit.hpp"
#include "lanlab/rng.hpp"
#include "lanlab/transition_model.hpp"

namespace lanlab {

/// I_n and r_n = I_n^{-1/2}.
struct RateSequence {
  double fisher_information = 0.0;
  double rate = 0.0;
  /// Monte Carlo standard error of I_n; 0 for exact values.
  double standard_error = 0.0;
};

enum class FisherMode { Exact, MonteCarlo };

struct FisherOptions {
  FisherMode mode = FisherMode::Exact;
  /// Paths used in Monte Carlo mode.
  std::size_t replications = 200;
};

/// Seed of an auxiliary stream family; keeps pilot runs disjoint from the
/// replication streams of the same master seed.
std::uint64_t domain_seed(std::uint64_t master_seed, std::uint64_t tag) noexcept;

/// Per-n path averages of score functionals, computed from R simulated paths
/// of length max(n_grid). Path r uses derive_stream(seed, r).
struct PathScoreRow {
  std::size_t n = 0;
  /// Mean and SE over paths of sum_j g^2.
  double sum_g_sq = 0.0;
  double sum_g_sq_se = 0.0;
  /// Mean and SE of sum_j |g|^p.
  double sum_abs_g_p = 0.0;
  double sum_abs_g_p_se = 0.0;
  /// Mean of sum_j (dg/dtheta + g^2 / 2)^2; NaN when the model has no dg.
  double sum_q_derivative_sq = std::numeric_limits<double>::quiet_NaN();
};

std::vector<PathScoreRow> path_score_stats(const TransitionModel& model, double theta0, double x0,
                                           std::span<const std::size_t> n_grid, double p_exponent,
                                           std::size_t replications, std::uint64_t seed,
                                           const Executor& executor = serial_executor());

/// Exact I_n by marginal propagation over the states of a counting model.
double exact_fisher_information(const TransitionModel& model, double theta0, double x0,
                                std::size_t n);

RateSequence fisher_and_rate(const TransitionModel& model, double theta0, double x0, std::size_t n,
                             const FisherOptions& options, std::uint64_t seed = 0,
                             const Executor& executor = serial_executor());

struct LanDecomposition {
  double u = 0.0;
  double delta_n = 0.0;
  double log_Z = 0.0;
  double psi_n = 0.0;
};

struct ZetaDiagnostics {
  double sum_zeta_sq = 0.0;
  double max_abs_zeta = 0.0;
  double sum_abs_zeta_cubed = 0.0;
  /// 2 sum zeta - r u sum g.
  double centered_combo = 0.0;
  /// sum_j E[zeta_j^2 | X_{j-1}]; NaN for estimated models.
  double cond_sum_zeta_sq = std::numeric_limits<double>::quiet_NaN();
};

/// Everything computed from one observed sample. Step j evaluates the model
/// with stream.derive(j - 1).
struct SampleAnalysis {
  double sum_g = 0.0;
  double sum_g_sq = 0.0;
  double delta_n = 0.0;
  std::vector<LanDecomposition> lan;
  std::vector<ZetaDiagnostics> zeta;
};

SampleAnalysis analyse_sample(const DiscreteSample& sample, const TransitionModel& model,
                              double theta0, std::span<const double> u_list,
                              const RateSequence& rate, const CounterStream& stream);

double delta_n(const DiscreteSample& sample, const TransitionModel& model, double theta0,
               const RateSequence& rate, const CounterStream& stream);

struct LoglikResult {
  double log_z_direct = 0.0;
  LanDecomposition decomposition;
};

/// Throws LikelihoodUndefined when a transition has zero density under
/// theta0 + r u.
LoglikResult loglik_ratio(const DiscreteSample& sample, const TransitionModel& model,
                          double theta0, double u, const RateSequence& rate,
                          const CounterStream& stream);

ZetaDiagnostics zeta_diagnostics(const DiscreteSample& sample, const TransitionModel& model,
                                 double theta0, double u, const RateSequence& rate,
                                 const CounterStream& stream);

struct ConditionRow {
  std::size_t n = 0;
  double fisher_information = 0.0;
  double rate = 0.0;
  /// r^2 sum g^2: mean and SE over paths.
  double cond3_mean = 0.0;
  double cond3_se = 0.0;
  /// r^p sum |g|^p: mean and SE over paths, and the exact value when available.
  double cond4_mean = 0.0;
  double cond4_se = 0.0;
  double cond4_exact = std::numeric_limits<double>::quiet_NaN();
  /// sup over the v-grid of r^2 sum_j E int (q(theta0 + r v) - q(theta0))^2 dlambda.
  double cond5 = 0.0;
  double cond5_argmax_v = 0.0;
  /// True when cond5 is the quadratic majorant rather than an exact value.
  bool cond5_majorant = false;
};

struct ConditionOptions {
  double p_exponent = 4.0;
  double N_sup = 2.0;
  std::size_t v_points = 17;
  std::size_t replications = 200;
  FisherOptions fisher;
};

std::vector<ConditionRow> condition_stats(const TransitionModel& model, double theta0, double x0,
                                          std::span<const std::size_t> n_grid,
                                          const ConditionOptions& options, std::uint64_t seed,
                                          const Executor& executor = serial_executor());

struct ReplicationRecord {
  std::size_t rep = 0;
  bool ok = true;
  std::string error;
  double delta_n = 0.0;
  double sum_g = 0.0;
  double sum_g_sq = 0.0;
  std::vector<LanDecomposition> lan;
  std::vector<ZetaDiagnostics> zeta;
};

struct PsiSummary {
  double u = 0.0;
  double mean_abs_psi = 0.0;
  double median_abs_psi = 0.0;
  double q90_abs_psi = 0.0;
  double median_sum_zeta_sq = 0.0;
  double median_max_abs_zeta = 0.0;
  double median_sum_abs_zeta_cubed = 0.0;
  double median_centered_combo = 0.0;
  double median_cond_sum_zeta_sq = std::numeric_limits<double>::quiet_NaN();
};

struct LanOptions {
  FisherOptions fisher;
  /// Fraction of discarded replications above which the run is fatal.
  double max_discard_fraction = 0.05;
};

struct LanReport {
  double theta0 = 0.0;
  double x0 = 0.0;
  std::size_t n = 0;
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  std::vector<double> u_list;
  RateSequence rate;
  std::vector<ReplicationRecord> records;
  std::size_t discarded = 0;
  double max_discard_fraction = 0.05;
  bool fatal = false;
  NormalityTest ks;
  NormalityTest ad;
  double delta_mean = 0.0;
  double delta_variance = 0.0;
  double delta_se = 0.0;
  std::vector<PsiSummary> psi;
};

/// R independent replications of (sample, Delta_n, log Z_n(u), zeta
/// statistics). Replication i samples with derive_stream(seed, i).derive(0)
/// and evaluates with .derive(1).
LanReport lan_experiment(const TransitionModel& model, double theta0, double x0, std::size_t n,
                         std::span<const double> u_list, std::size_t replications,
                         std::uint64_t seed, const LanOptions& options = {},
                         const Executor& executor = serial_executor());

/// Recomputes the summary fields of a report from its records.
void summarize(LanReport& report);

}  // namespace lanlab
