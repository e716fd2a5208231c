#include "lanlab/kde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace lanlab {

double silverman_bandwidth(std::span<const double> samples, bool* degenerate) {
  if (samples.empty()) throw std::invalid_argument("kde: samples must be non-empty");
  const double m = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= m;
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double sd = samples.size() > 1 ? std::sqrt(ss / (m - 1.0)) : 0.0;
  const double shrink = std::pow(m, -0.2);
  if (!(sd > 1e-12 * (std::fabs(mean) + 1.0))) {
    if (degenerate) *degenerate = true;
    return (std::fabs(mean) + 1.0) * shrink;
  }
  if (degenerate) *degenerate = false;
  return 1.06 * sd * shrink;
}

double select_bandwidth(std::span<const double> samples, const KdeScoreConfig& cfg,
                        bool* degenerate) {
  if (cfg.bandwidth_rule == BandwidthRule::Fixed) {
    if (!(cfg.fixed_bandwidth > 0.0)) throw std::invalid_argument("kde: bandwidth must be > 0");
    if (degenerate) *degenerate = false;
    return cfg.fixed_bandwidth;
  }
  return silverman_bandwidth(samples, degenerate);
}

double log_kde(std::span<const double> samples, double y, double b, bool bias_correct) {
  if (samples.empty()) throw std::invalid_argument("kde: samples must be non-empty");
  const double inv = 1.0 / b;
  double best = std::numeric_limits<double>::infinity();
  for (double v : samples) best = std::min(best, std::fabs(y - v));
  const double zmin = best * inv;
  const double shift = -0.5 * zmin * zmin;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double v : samples) {
    const double z = (y - v) * inv;
    const double w = std::exp(-0.5 * z * z - shift);
    sum += w;
    sum_sq += w * w;
  }
  const double m = static_cast<double>(samples.size());
  const double log_norm = -0.5 * std::log(2.0 * std::numbers::pi) - std::log(b) - std::log(m);
  double correction = 0.0;
  if (bias_correct && samples.size() > 1) {
    // Relative variance of the sample mean of the kernel values.
    const double rel = (m * sum_sq / (sum * sum) - 1.0) / (m - 1.0);
    correction = 0.5 * std::max(rel, 0.0);
  }
  return shift + std::log(sum) + log_norm + correction;
}

KdeEstimate kde_density(std::span<const double> samples, double y, const KdeScoreConfig& cfg) {
  KdeEstimate out;
  out.bandwidth = select_bandwidth(samples, cfg, &out.degenerate);
  out.log_density = log_kde(samples, y, out.bandwidth);
  out.density = std::exp(out.log_density);
  return out;
}

}  // namespace lanlab
