#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "lanlab/rng.hpp"
#include "lanlab/sde_model.hpp"

namespace lanlab {

/// Reference measure lambda of the transition density.
enum class ReferenceMeasure { Lebesgue, Counting };

/// Everything the LAN machinery needs about one transition x -> y.
struct TransitionEval {
  /// g(theta; x, y).
  double score = 0.0;
  /// d/dtheta g(theta; x, y); NaN when the model cannot provide it.
  double score_derivative = std::numeric_limits<double>::quiet_NaN();
  /// log p(theta; x, y).
  double log_density = 0.0;
  /// log p(theta_k; x, y) for the requested shifted parameters.
  std::vector<double> shifted_log_densities;
};

/// Weighted point: sum of weight * f(y) over the nodes approximates
/// int f(y) lambda(dy). Exact (unit weights over the support) for counting lambda.
struct QuadratureNode {
  double y = 0.0;
  double weight = 1.0;
};

/// Statistical experiment of one observation step: the triple (p, q, g).
///
/// Estimated models use internal randomness; every quantity returned by one
/// `evaluate` call is computed from the same realization so that differences
/// across parameters are free of independent noise.
class TransitionModel {
 public:
  virtual ~TransitionModel() = default;

  virtual ReferenceMeasure reference_measure() const = 0;
  virtual ParameterInterval theta_interval() const = 0;
  /// True when p, q and g are available in closed form.
  virtual bool is_exact() const = 0;
  /// Exponents p for which E|g|^p is known to be finite (upper bound, exclusive).
  virtual double moment_limit() const { return std::numeric_limits<double>::infinity(); }

  virtual TransitionEval evaluate(double theta, double x, double y,
                                  std::span<const double> shifted_thetas,
                                  CounterStream& rng) const = 0;

  /// q(theta; x, y) = g sqrt(p) / 2 where p > 0.
  virtual double sqrt_derivative(double theta, double x, double y, CounterStream& rng) const;

  virtual double sample_next(double theta, double x, CounterStream& rng) const = 0;
  virtual DiscreteSample sample_path(double theta, double x0, std::size_t n,
                                     CounterStream& rng) const;

  virtual std::vector<QuadratureNode> integration_nodes(double theta, double x) const = 0;
};

struct MartingaleResidual {
  double mean = 0.0;
  double standard_error = 0.0;
};

/// E_x^theta g(theta; x, X_h): exact summation for counting lambda, Monte
/// Carlo over `samples` draws otherwise.
MartingaleResidual score_martingale_residual(const TransitionModel& model, double theta, double x,
                                             std::size_t samples, const CounterStream& rng);

/// int ((sqrt p(theta+delta) - sqrt p(theta)) / delta - q(theta))^2 lambda(dy).
double l2_derivative_residual(const TransitionModel& model, double theta, double delta, double x,
                              const CounterStream& rng);

}  // namespace lanlab
