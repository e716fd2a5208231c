#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "lanlab/transition_model.hpp"

namespace lanlab {

/// Row-major S x S matrices P(theta), dP/dtheta and d2P/dtheta2.
struct ChainMatrices {
  std::size_t states = 0;
  std::vector<double> p;
  std::vector<double> dp;
  std::vector<double> d2p;

  double at(std::size_t i, std::size_t j) const { return p[i * states + j]; }
  double d_at(std::size_t i, std::size_t j) const { return dp[i * states + j]; }
  double d2_at(std::size_t i, std::size_t j) const { return d2p[i * states + j]; }
};

/// Finite-state chain on {0, ..., S-1} with closed-form entries; states are
/// carried as doubles holding exact small integers.
class FiniteChainModel final : public TransitionModel {
 public:
  using Evaluator = std::function<ChainMatrices(double theta)>;

  /// Validates stochasticity on a grid of 33 interior points of the interval.
  FiniteChainModel(std::string name, std::size_t states, Evaluator evaluator,
                   ParameterInterval interval);

  const std::string& name() const noexcept { return name_; }
  std::size_t states() const noexcept { return states_; }
  ChainMatrices matrices(double theta) const;

  ReferenceMeasure reference_measure() const override { return ReferenceMeasure::Counting; }
  ParameterInterval theta_interval() const override { return interval_; }
  bool is_exact() const override { return true; }

  TransitionEval evaluate(double theta, double x, double y, std::span<const double> shifted_thetas,
                          CounterStream& rng) const override;
  /// Zero where both p and dp vanish; +inf where p = 0 < |dp|.
  double sqrt_derivative(double theta, double x, double y, CounterStream& rng) const override;
  double sample_next(double theta, double x, CounterStream& rng) const override;
  std::vector<QuadratureNode> integration_nodes(double theta, double x) const override;

  std::size_t state_index(double x) const;

 private:
  std::string name_;
  std::size_t states_;
  Evaluator evaluator_;
  ParameterInterval interval_;
};

/// [[1 - theta, theta], [theta, 1 - theta]] on (0, 1).
FiniteChainModel symmetric_two_state_chain();

/// Three-state chain with rows softmax(weights[i][j] * theta + biases[i][j]).
FiniteChainModel softmax_three_state_chain(const std::vector<std::vector<double>>& weights,
                                           const std::vector<std::vector<double>>& biases,
                                           ParameterInterval interval = {-5.0, 5.0});
FiniteChainModel softmax_three_state_chain();

/// P fixed, dP = 0.
FiniteChainModel constant_chain(std::vector<std::vector<double>> p,
                                ParameterInterval interval = {-1e6, 1e6});

/// theta -> P(anchor + factor * (theta - anchor)); multiplies every score at
/// theta = anchor by `factor`.
FiniteChainModel reparameterized_chain(const FiniteChainModel& base, double anchor, double factor);

struct ExactScore {
  double g = 0.0;
  double q = 0.0;
};

/// Throws ScoreUndefined when p_ij(theta) = 0.
ExactScore exact_score(const FiniteChainModel& chain, double theta, std::size_t i, std::size_t j);

/// Sum over k = 1..n of E g^2(X_{k-1}, X_k) started from state i0.
double exact_fisher_info(const FiniteChainModel& chain, double theta0, std::size_t i0,
                         std::size_t n);

/// Same quantity by enumerating all S^n paths; for small n only.
double brute_force_fisher_info(const FiniteChainModel& chain, double theta0, std::size_t i0,
                               std::size_t n);

/// Invariant law by power iteration on (P + I) / 2. Throws NoUniqueInvariant
/// for a reducible chain.
std::vector<double> stationary_distribution(const FiniteChainModel& chain, double theta0);

double exact_sigma2(const FiniteChainModel& chain, double theta0);

/// Law of X_k for k = 0..n started at i0.
std::vector<std::vector<double>> marginal_laws(const FiniteChainModel& chain, double theta0,
                                               std::size_t i0, std::size_t n);

DiscreteSample sample_chain(const FiniteChainModel& chain, double theta, std::size_t i0,
                            std::size_t n, CounterStream& rng);

}  // namespace lanlab
