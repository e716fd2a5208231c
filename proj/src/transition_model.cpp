#include "lanlab/transition_model.hpp"

#include <cmath>
#include <stdexcept>

namespace lanlab {

double TransitionModel::sqrt_derivative(double theta, double x, double y,
                                        CounterStream& rng) const {
  const TransitionEval e = evaluate(theta, x, y, {}, rng);
  return 0.5 * e.score * std::exp(0.5 * e.log_density);
}

DiscreteSample TransitionModel::sample_path(double theta, double x0, std::size_t n,
                                            CounterStream& rng) const {
  DiscreteSample sample;
  sample.values.resize(n + 1);
  sample.values[0] = x0;
  for (std::size_t k = 1; k <= n; ++k) sample.values[k] = sample_next(theta, sample.values[k - 1], rng);
  return sample;
}

MartingaleResidual score_martingale_residual(const TransitionModel& model, double theta, double x,
                                             std::size_t samples, const CounterStream& rng) {
  MartingaleResidual out;
  if (model.reference_measure() == ReferenceMeasure::Counting) {
    CounterStream unused = rng;
    for (const auto& node : model.integration_nodes(theta, x)) {
      const TransitionEval e = [&] {
        CounterStream s = unused;
        return model.evaluate(theta, x, node.y, {}, s);
      }();
      const double p = std::exp(e.log_density);
      if (p > 0.0) out.mean += node.weight * e.score * p;
    }
    return out;
  }
  if (samples < 2) throw std::invalid_argument("score_martingale_residual: need >= 2 samples");
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    CounterStream draw = rng.derive(2 * i);
    CounterStream eval = rng.derive(2 * i + 1);
    const double y = model.sample_next(theta, x, draw);
    const double g = model.evaluate(theta, x, y, {}, eval).score;
    sum += g;
    sum_sq += g * g;
  }
  const double m = static_cast<double>(samples);
  out.mean = sum / m;
  const double var = std::max(0.0, (sum_sq - m * out.mean * out.mean) / (m - 1.0));
  out.standard_error = std::sqrt(var / m);
  return out;
}

double l2_derivative_residual(const TransitionModel& model, double theta, double delta, double x,
                              const CounterStream& rng) {
  if (!model.theta_interval().contains(theta + delta)) {
    throw std::invalid_argument("l2_derivative_residual: theta + delta outside the interval");
  }
  const double shifted[] = {theta + delta};
  double total = 0.0;
  for (const auto& node : model.integration_nodes(theta, x)) {
    CounterStream s = rng;
    CounterStream s_q = rng;
    const TransitionEval e = model.evaluate(theta, x, node.y, shifted, s);
    const double root = std::exp(0.5 * e.log_density);
    const double root_shifted = std::exp(0.5 * e.shifted_log_densities[0]);
    const double q = root > 0.0 ? 0.5 * e.score * root : model.sqrt_derivative(theta, x, node.y, s_q);
    const double diff = (root_shifted - root) / delta - q;
    total += node.weight * diff * diff;
  }
  return total;
}

}  // namespace lanlab
