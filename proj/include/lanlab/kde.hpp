#pragma once

#include <cstddef>
#include <span>

namespace lanlab {

enum class BandwidthRule { Silverman, Fixed };

struct KdeScoreConfig {
  std::size_t M = 4000;
  BandwidthRule bandwidth_rule = BandwidthRule::Silverman;
  /// Used when bandwidth_rule == Fixed.
  double fixed_bandwidth = 0.05;
  double fd_step = 1e-2;
  bool richardson = false;
  /// Replay one noise tape at every parameter value; independent tapes otherwise.
  bool common_random_numbers = true;
  /// Adds var(p_hat) / (2 p_hat^2), estimated from the kernel values, to
  /// log p_hat. Removes the leading O(1/M) term of E log p_hat - log p.
  bool log_bias_correction = false;
};

struct KdeEstimate {
  double density = 0.0;
  double log_density = 0.0;
  double bandwidth = 0.0;
  /// True when the samples had zero spread and the fallback bandwidth was used.
  bool degenerate = false;
};

/// 1.06 * sd * M^{-1/5}; for zero spread, (|mean| + 1) * M^{-1/5} with the
/// degenerate flag set.
double silverman_bandwidth(std::span<const double> samples, bool* degenerate = nullptr);

double select_bandwidth(std::span<const double> samples, const KdeScoreConfig& cfg,
                        bool* degenerate = nullptr);

/// log of the Gaussian-kernel estimate at y with bandwidth b, via log-sum-exp
/// so that far tails stay finite. With bias_correct, the delta-method term
/// var(p_hat) / (2 p_hat^2) is added.
double log_kde(std::span<const double> samples, double y, double b, bool bias_correct = false);

KdeEstimate kde_density(std::span<const double> samples, double y, const KdeScoreConfig& cfg);

}  // namespace lanlab
