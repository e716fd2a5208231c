#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lanlab/errors.hpp"
#include "lanlab/finite_chain.hpp"

using namespace lanlab;

namespace {
constexpr double kSigma2 = 1.0 / 0.21;
}

TEST(ExactScore, SymmetricChainHandValues) {
  const FiniteChainModel c = symmetric_two_state_chain();
  EXPECT_NEAR(exact_score(c, 0.3, 0, 1).g, 1.0 / 0.3, 1e-15);
  EXPECT_NEAR(exact_score(c, 0.3, 0, 0).g, -1.0 / 0.7, 1e-15);
  EXPECT_NEAR(exact_score(c, 0.3, 1, 0).g, 3.3333333333333333, 1e-15);
}

TEST(ExactScore, IdentitiesOnEveryEntry) {
  const FiniteChainModel c = softmax_three_state_chain();
  for (double th : {-1.0, 0.0, 0.4, 2.0}) {
    const ChainMatrices m = c.matrices(th);
    for (std::size_t i = 0; i < 3; ++i) {
      double mart = 0.0, row = 0.0;
      for (std::size_t j = 0; j < 3; ++j) {
        const ExactScore s = exact_score(c, th, i, j);
        EXPECT_NEAR(s.g, 2.0 * s.q / std::sqrt(m.at(i, j)), 1e-14);
        mart += s.g * m.at(i, j);
        row += m.at(i, j);
      }
      EXPECT_NEAR(mart, 0.0, 1e-14);
      EXPECT_NEAR(row, 1.0, 1e-14);
    }
  }
}

TEST(ExactScore, ZeroEntryIsUndefined) {
  const FiniteChainModel c = constant_chain({{1.0, 0.0}, {0.5, 0.5}});
  EXPECT_THROW(exact_score(c, 0.0, 0, 1), ScoreUndefined);
}

TEST(FiniteChain, RejectsNonStochasticRows) {
  EXPECT_THROW(constant_chain({{0.5, 0.6}, {0.5, 0.5}}), InvalidSpec);
}

TEST(FiniteChain, SqrtDerivativeConventions) {
  const FiniteChainModel c = constant_chain({{1.0, 0.0}, {0.5, 0.5}});
  CounterStream rng(0, 0);
  EXPECT_EQ(c.sqrt_derivative(0.0, 0.0, 1.0, rng), 0.0);
  const FiniteChainModel sym = symmetric_two_state_chain();
  const ChainMatrices m = sym.matrices(0.3);
  EXPECT_NEAR(sym.sqrt_derivative(0.3, 0.0, 1.0, rng), m.d_at(0, 1) / (2 * std::sqrt(m.at(0, 1))), 1e-15);
}

TEST(FisherInfo, SymmetricChainClosedForm) {
  const FiniteChainModel c = symmetric_two_state_chain();
  for (std::size_t i0 : {0u, 1u}) {
    for (std::size_t n : {1u, 5u, 100u}) {
      EXPECT_NEAR(exact_fisher_info(c, 0.3, i0, n), n * kSigma2, 1e-11 * n);
    }
  }
}

TEST(FisherInfo, DynamicProgrammingMatchesEnumeration) {
  const FiniteChainModel c = softmax_three_state_chain();
  for (std::size_t n = 1; n <= 6; ++n) {
    const double dp = exact_fisher_info(c, 0.4, 2, n);
    EXPECT_NEAR(dp, brute_force_fisher_info(c, 0.4, 2, n), 1e-12 * dp) << n;
  }
}

TEST(FisherInfo, OneStepIsDirectSum) {
  const FiniteChainModel c = softmax_three_state_chain();
  const ChainMatrices m = c.matrices(0.4);
  double direct = 0.0;
  for (std::size_t j = 0; j < 3; ++j) direct += m.d_at(1, j) * m.d_at(1, j) / m.at(1, j);
  EXPECT_NEAR(exact_fisher_info(c, 0.4, 1, 1), direct, 1e-14);
}

TEST(FisherInfo, ThetaFreeChainIsZero) {
  const FiniteChainModel c = constant_chain({{0.2, 0.8}, {0.5, 0.5}});
  EXPECT_EQ(exact_fisher_info(c, 0.0, 0, 10), 0.0);
  EXPECT_EQ(exact_sigma2(c, 0.0), 0.0);
}

TEST(Stationary, SymmetricChainIsUniform) {
  const auto pi = stationary_distribution(symmetric_two_state_chain(), 0.3);
  EXPECT_NEAR(pi[0], 0.5, 1e-13);
  EXPECT_NEAR(pi[1], 0.5, 1e-13);
  EXPECT_NEAR(exact_sigma2(symmetric_two_state_chain(), 0.3), kSigma2, 1e-12);
}

TEST(Stationary, InvariantUnderTransition) {
  const FiniteChainModel c = softmax_three_state_chain();
  const auto pi = stationary_distribution(c, 0.7);
  const ChainMatrices m = c.matrices(0.7);
  for (std::size_t j = 0; j < 3; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < 3; ++i) s += pi[i] * m.at(i, j);
    EXPECT_NEAR(s, pi[j], 1e-12);
  }
}

TEST(Stationary, ReducibleChainThrows) {
  const FiniteChainModel c = constant_chain({{1.0, 0.0}, {0.0, 1.0}});
  EXPECT_THROW(stationary_distribution(c, 0.0), NoUniqueInvariant);
}

TEST(Sigma2, LimitOfFisherPerStep) {
  const FiniteChainModel c = softmax_three_state_chain();
  const std::size_t n = 1000;
  const auto pi = stationary_distribution(c, 0.4);
  double stationary = 0.0;
  for (std::size_t i = 0; i < 3; ++i) stationary += pi[i] * exact_fisher_info(c, 0.4, i, n);
  EXPECT_NEAR(stationary / n, exact_sigma2(c, 0.4), 1e-9);
  // From a fixed state the transient washes out at rate 1/n.
  EXPECT_NEAR(exact_fisher_info(c, 0.4, 0, n) / n, exact_sigma2(c, 0.4), 1e-2);
}

TEST(Reparameterized, ScalesScoreByFactor) {
  const FiniteChainModel base = symmetric_two_state_chain();
  const FiniteChainModel doubled = reparameterized_chain(base, 0.3, 2.0);
  EXPECT_NEAR(exact_score(doubled, 0.3, 0, 1).g, 2.0 * exact_score(base, 0.3, 0, 1).g, 1e-12);
  EXPECT_NEAR(exact_sigma2(doubled, 0.3), 4.0 * exact_sigma2(base, 0.3), 1e-9);
}

TEST(MarginalLaws, RowsSumToOne) {
  const auto laws = marginal_laws(softmax_three_state_chain(), 0.4, 1, 20);
  ASSERT_EQ(laws.size(), 21u);
  EXPECT_EQ(laws[0], (std::vector<double>{0.0, 1.0, 0.0}));
  for (const auto& law : laws) {
    double s = 0.0;
    for (double p : law) s += p;
    EXPECT_NEAR(s, 1.0, 1e-13);
  }
}

TEST(SampleChain, AbsorbingStateStaysPut) {
  const FiniteChainModel c = constant_chain({{1.0, 0.0}, {0.5, 0.5}});
  CounterStream rng(1, 0);
  const DiscreteSample s = sample_chain(c, 0.0, 0, 100, rng);
  for (double v : s.values) EXPECT_EQ(v, 0.0);
}

TEST(SampleChain, UniformRowsGiveUniformFrequencies) {
  const FiniteChainModel c = constant_chain({{0.25, 0.25, 0.25, 0.25},
                                             {0.25, 0.25, 0.25, 0.25},
                                             {0.25, 0.25, 0.25, 0.25},
                                             {0.25, 0.25, 0.25, 0.25}});
  CounterStream rng(2, 0);
  const std::size_t n = 100000;
  const DiscreteSample s = sample_chain(c, 0.0, 0, n, rng);
  std::vector<double> counts(4, 0.0);
  for (std::size_t k = 1; k <= n; ++k) counts[static_cast<std::size_t>(s.values[k])] += 1.0;
  const double se = std::sqrt(n * 0.25 * 0.75);
  for (double cnt : counts) EXPECT_NEAR(cnt, n * 0.25, 3.5 * se);
}

TEST(SampleChain, SameSeedReproduces) {
  const FiniteChainModel c = softmax_three_state_chain();
  CounterStream a(3, 3), b(3, 3);
  EXPECT_EQ(sample_chain(c, 0.4, 0, 500, a).values, sample_chain(c, 0.4, 0, 500, b).values);
}
