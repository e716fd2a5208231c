#include "lanlab/finite_chain.hpp"

#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "lanlab/errors.hpp"

namespace lanlab {

FiniteChainModel::FiniteChainModel(std::string name, std::size_t states, Evaluator evaluator,
                                   ParameterInterval interval)
    : name_(std::move(name)), states_(states), evaluator_(std::move(evaluator)),
      interval_(interval) {
  if (states_ < 1) throw InvalidSpec("chain: need at least one state");
  if (!(interval_.hi > interval_.lo)) throw InvalidSpec("chain: empty parameter interval");
  const double lo = std::isfinite(interval_.lo) ? interval_.lo : -1e3;
  const double hi = std::isfinite(interval_.hi) ? interval_.hi : 1e3;
  for (int k = 1; k <= 33; ++k) {
    const double theta = lo + (hi - lo) * k / 34.0;
    const ChainMatrices m = matrices(theta);
    for (std::size_t i = 0; i < states_; ++i) {
      double row = 0.0;
      double drow = 0.0;
      for (std::size_t j = 0; j < states_; ++j) {
        if (m.at(i, j) < 0.0) throw InvalidSpec("chain: negative transition probability");
        row += m.at(i, j);
        drow += m.d_at(i, j);
      }
      if (std::fabs(row - 1.0) > 1e-12 || std::fabs(drow) > 1e-12) {
        std::ostringstream msg;
        msg << "chain '" << name_ << "': row " << i << " not stochastic at theta = " << theta;
        throw InvalidSpec(msg.str());
      }
    }
  }
}

ChainMatrices FiniteChainModel::matrices(double theta) const {
  ChainMatrices m = evaluator_(theta);
  const std::size_t cells = states_ * states_;
  if (m.states != states_ || m.p.size() != cells || m.dp.size() != cells || m.d2p.size() != cells) {
    throw InvalidSpec("chain: evaluator returned matrices of the wrong shape");
  }
  return m;
}

std::size_t FiniteChainModel::state_index(double x) const {
  const double r = std::nearbyint(x);
  if (r != x || r < 0.0 || r >= static_cast<double>(states_)) {
    std::ostringstream msg;
    msg << "chain: " << x << " is not a state index";
    throw std::invalid_argument(msg.str());
  }
  return static_cast<std::size_t>(r);
}

TransitionEval FiniteChainModel::evaluate(double theta, double x, double y,
                                          std::span<const double> shifted_thetas,
                                          CounterStream&) const {
  const std::size_t i = state_index(x);
  const std::size_t j = state_index(y);
  const ChainMatrices m = matrices(theta);
  const double p = m.at(i, j);
  if (!(p > 0.0)) {
    std::ostringstream msg;
    msg << "chain: p(" << i << " -> " << j << ") = 0 at theta = " << theta;
    throw ScoreUndefined(y, msg.str());
  }
  TransitionEval out;
  out.log_density = std::log(p);
  out.score = m.d_at(i, j) / p;
  out.score_derivative = m.d2_at(i, j) / p - out.score * out.score;
  out.shifted_log_densities.reserve(shifted_thetas.size());
  for (double t : shifted_thetas) {
    const double ps = matrices(t).at(i, j);
    out.shifted_log_densities.push_back(ps > 0.0 ? std::log(ps)
                                                 : -std::numeric_limits<double>::infinity());
  }
  return out;
}

double FiniteChainModel::sqrt_derivative(double theta, double x, double y, CounterStream&) const {
  const std::size_t i = state_index(x);
  const std::size_t j = state_index(y);
  const ChainMatrices m = matrices(theta);
  const double p = m.at(i, j);
  const double dp = m.d_at(i, j);
  if (p > 0.0) return dp / (2.0 * std::sqrt(p));
  return dp == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

double FiniteChainModel::sample_next(double theta, double x, CounterStream& rng) const {
  const std::size_t i = state_index(x);
  const ChainMatrices m = matrices(theta);
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t last = i;
  for (std::size_t j = 0; j < states_; ++j) {
    const double p = m.at(i, j);
    if (p <= 0.0) continue;
    last = j;
    acc += p;
    if (u < acc) return static_cast<double>(j);
  }
  return static_cast<double>(last);
}

std::vector<QuadratureNode> FiniteChainModel::integration_nodes(double, double) const {
  std::vector<QuadratureNode> nodes(states_);
  for (std::size_t j = 0; j < states_; ++j) nodes[j] = {static_cast<double>(j), 1.0};
  return nodes;
}

// ---------------------------------------------------------------------------

FiniteChainModel symmetric_two_state_chain() {
  auto eval = [](double theta) {
    ChainMatrices m;
    m.states = 2;
    m.p = {1.0 - theta, theta, theta, 1.0 - theta};
    m.dp = {-1.0, 1.0, 1.0, -1.0};
    m.d2p = {0.0, 0.0, 0.0, 0.0};
    return m;
  };
  return FiniteChainModel("symmetric_two_state", 2, eval, {0.0, 1.0});
}

FiniteChainModel softmax_three_state_chain(const std::vector<std::vector<double>>& weights,
                                           const std::vector<std::vector<double>>& biases,
                                           ParameterInterval interval) {
  auto square3 = [](const std::vector<std::vector<double>>& a) {
    if (a.size() != 3) return false;
    for (const auto& row : a) {
      if (row.size() != 3) return false;
    }
    return true;
  };
  if (!square3(weights) || !square3(biases)) {
    throw InvalidSpec("softmax chain: weights and biases must be 3 x 3");
  }
  auto eval = [weights, biases](double theta) {
    ChainMatrices m;
    m.states = 3;
    m.p.resize(9);
    m.dp.resize(9);
    m.d2p.resize(9);
    for (std::size_t i = 0; i < 3; ++i) {
      double z[3];
      double zmax = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < 3; ++j) {
        z[j] = weights[i][j] * theta + biases[i][j];
        zmax = std::max(zmax, z[j]);
      }
      double total = 0.0;
      for (double& v : z) total += (v = std::exp(v - zmax));
      double wbar = 0.0;
      for (std::size_t j = 0; j < 3; ++j) {
        m.p[3 * i + j] = z[j] / total;
        wbar += m.p[3 * i + j] * weights[i][j];
      }
      double wvar = 0.0;
      for (std::size_t j = 0; j < 3; ++j) {
        const double c = weights[i][j] - wbar;
        wvar += m.p[3 * i + j] * c * c;
      }
      for (std::size_t j = 0; j < 3; ++j) {
        const double c = weights[i][j] - wbar;
        const double p = m.p[3 * i + j];
        m.dp[3 * i + j] = p * c;
        m.d2p[3 * i + j] = p * (c * c - wvar);
      }
    }
    return m;
  };
  return FiniteChainModel("softmax_three_state", 3, eval, interval);
}

FiniteChainModel softmax_three_state_chain() {
  return softmax_three_state_chain({{0.0, 1.0, -1.0}, {-1.0, 0.0, 1.0}, {1.0, -1.0, 0.0}},
                                   {{0.5, 0.0, 0.0}, {0.0, 0.5, 0.0}, {0.0, 0.0, 0.5}});
}

FiniteChainModel constant_chain(std::vector<std::vector<double>> p, ParameterInterval interval) {
  const std::size_t s = p.size();
  std::vector<double> flat;
  for (const auto& row : p) {
    if (row.size() != s) throw InvalidSpec("constant chain: matrix must be square");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  auto eval = [s, flat](double) {
    ChainMatrices m;
    m.states = s;
    m.p = flat;
    m.dp.assign(flat.size(), 0.0);
    m.d2p.assign(flat.size(), 0.0);
    return m;
  };
  return FiniteChainModel("constant", s, eval, interval);
}

FiniteChainModel reparameterized_chain(const FiniteChainModel& base, double anchor, double factor) {
  if (!(factor != 0.0)) throw InvalidSpec("reparameterized chain: factor must be non-zero");
  const ParameterInterval bi = base.theta_interval();
  double lo = anchor + (bi.lo - anchor) / factor;
  double hi = anchor + (bi.hi - anchor) / factor;
  if (lo > hi) std::swap(lo, hi);
  auto eval = [base, anchor, factor](double theta) {
    ChainMatrices m = base.matrices(anchor + factor * (theta - anchor));
    for (double& v : m.dp) v *= factor;
    for (double& v : m.d2p) v *= factor * factor;
    return m;
  };
  return FiniteChainModel(base.name() + "_reparameterized", base.states(), eval, {lo, hi});
}

// ---------------------------------------------------------------------------

ExactScore exact_score(const FiniteChainModel& chain, double theta, std::size_t i, std::size_t j) {
  if (i >= chain.states() || j >= chain.states()) {
    throw std::invalid_argument("exact_score: state out of range");
  }
  const ChainMatrices m = chain.matrices(theta);
  const double p = m.at(i, j);
  if (!(p > 0.0)) {
    std::ostringstream msg;
    msg << "exact_score: p(" << i << " -> " << j << ") = 0";
    throw ScoreUndefined(static_cast<double>(j), msg.str());
  }
  return {m.d_at(i, j) / p, m.d_at(i, j) / (2.0 * std::sqrt(p))};
}

namespace {

/// E_i g^2(i, X_1) for each i.
std::vector<double> per_state_information(const ChainMatrices& m) {
  std::vector<double> info(m.states, 0.0);
  for (std::size_t i = 0; i < m.states; ++i) {
    for (std::size_t j = 0; j < m.states; ++j) {
      const double p = m.at(i, j);
      if (p > 0.0) info[i] += m.d_at(i, j) * m.d_at(i, j) / p;
    }
  }
  return info;
}

std::vector<double> step_law(const ChainMatrices& m, const std::vector<double>& law) {
  std::vector<double> next(m.states, 0.0);
  for (std::size_t i = 0; i < m.states; ++i) {
    if (law[i] == 0.0) continue;
    for (std::size_t j = 0; j < m.states; ++j) next[j] += law[i] * m.at(i, j);
  }
  return next;
}

}  // namespace

std::vector<std::vector<double>> marginal_laws(const FiniteChainModel& chain, double theta0,
                                               std::size_t i0, std::size_t n) {
  if (i0 >= chain.states()) throw std::invalid_argument("marginal_laws: initial state out of range");
  const ChainMatrices m = chain.matrices(theta0);
  std::vector<std::vector<double>> laws;
  laws.reserve(n + 1);
  std::vector<double> law(chain.states(), 0.0);
  law[i0] = 1.0;
  laws.push_back(law);
  for (std::size_t k = 0; k < n; ++k) laws.push_back(law = step_law(m, law));
  return laws;
}

double exact_fisher_info(const FiniteChainModel& chain, double theta0, std::size_t i0,
                         std::size_t n) {
  if (n < 1) throw std::invalid_argument("exact_fisher_info: n must be >= 1");
  if (i0 >= chain.states()) throw std::invalid_argument("exact_fisher_info: state out of range");
  const ChainMatrices m = chain.matrices(theta0);
  const std::vector<double> info = per_state_information(m);
  std::vector<double> law(chain.states(), 0.0);
  law[i0] = 1.0;
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < chain.states(); ++i) total += law[i] * info[i];
    law = step_law(m, law);
  }
  return total;
}

double brute_force_fisher_info(const FiniteChainModel& chain, double theta0, std::size_t i0,
                               std::size_t n) {
  const std::size_t s = chain.states();
  const ChainMatrices m = chain.matrices(theta0);
  std::size_t paths = 1;
  for (std::size_t k = 0; k < n; ++k) {
    if (paths > (std::size_t{1} << 24) / s) throw std::invalid_argument("brute force: too many paths");
    paths *= s;
  }
  double total = 0.0;
  std::vector<std::size_t> states(n);
  for (std::size_t code = 0; code < paths; ++code) {
    std::size_t c = code;
    for (std::size_t k = 0; k < n; ++k) {
      states[k] = c % s;
      c /= s;
    }
    double prob = 1.0;
    double sum_sq = 0.0;
    std::size_t prev = i0;
    for (std::size_t k = 0; k < n; ++k) {
      const double p = m.at(prev, states[k]);
      prob *= p;
      if (p > 0.0) {
        const double g = m.d_at(prev, states[k]) / p;
        sum_sq += g * g;
      }
      prev = states[k];
    }
    total += prob * sum_sq;
  }
  return total;
}

std::vector<double> stationary_distribution(const FiniteChainModel& chain, double theta0) {
  const std::size_t s = chain.states();
  const ChainMatrices m = chain.matrices(theta0);
  // Irreducibility: every state reaches every other along positive entries.
  for (std::size_t start = 0; start < s; ++start) {
    std::vector<bool> seen(s, false);
    std::queue<std::size_t> todo;
    todo.push(start);
    seen[start] = true;
    while (!todo.empty()) {
      const std::size_t i = todo.front();
      todo.pop();
      for (std::size_t j = 0; j < s; ++j) {
        if (m.at(i, j) > 0.0 && !seen[j]) {
          seen[j] = true;
          todo.push(j);
        }
      }
    }
    for (std::size_t j = 0; j < s; ++j) {
      if (!seen[j]) {
        std::ostringstream msg;
        msg << "chain '" << chain.name() << "' is reducible at theta = " << theta0 << " (state "
            << j << " unreachable from " << start << ")";
        throw NoUniqueInvariant(msg.str());
      }
    }
  }
  std::vector<double> law(s, 1.0 / static_cast<double>(s));
  for (int iter = 0; iter < 1000000; ++iter) {
    std::vector<double> next = step_law(m, law);
    double change = 0.0;
    for (std::size_t i = 0; i < s; ++i) {
      next[i] = 0.5 * (next[i] + law[i]);
      change += std::fabs(next[i] - law[i]);
    }
    law = std::move(next);
    if (change < 1e-13) break;
  }
  double total = 0.0;
  for (double v : law) total += v;
  for (double& v : law) v /= total;
  return law;
}

double exact_sigma2(const FiniteChainModel& chain, double theta0) {
  const std::vector<double> pi = stationary_distribution(chain, theta0);
  const std::vector<double> info = per_state_information(chain.matrices(theta0));
  double out = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) out += pi[i] * info[i];
  return out;
}

DiscreteSample sample_chain(const FiniteChainModel& chain, double theta, std::size_t i0,
                            std::size_t n, CounterStream& rng) {
  if (i0 >= chain.states()) throw std::invalid_argument("sample_chain: state out of range");
  return chain.sample_path(theta, static_cast<double>(i0), n, rng);
}

}  // namespace lanlab
