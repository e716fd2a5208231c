#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lanlab/errors.hpp"
#include "lanlab/finite_chain.hpp"
#include "lanlab/harness/thread_pool.hpp"
#include "lanlab/lan_analysis.hpp"

using namespace lanlab;

namespace {

constexpr double kSigma2 = 1.0 / 0.21;

DiscreteSample sample_of(std::vector<double> v) { return DiscreteSample{std::move(v)}; }

DiscreteSample draw(const FiniteChainModel& c, double theta, std::size_t n, std::uint64_t key) {
  CounterStream rng(key, 0);
  return sample_chain(c, theta, 0, n, rng);
}

}  // namespace

TEST(FisherAndRate, ExactRateForSymmetricChain) {
  const FiniteChainModel c = symmetric_two_state_chain();
  const RateSequence r = fisher_and_rate(c, 0.3, 0.0, 100, {});
  EXPECT_NEAR(r.fisher_information, 100 * kSigma2, 1e-10);
  EXPECT_NEAR(r.rate, 0.0458257569495584, 1e-15);
  EXPECT_EQ(r.standard_error, 0.0);
}

TEST(FisherAndRate, MonteCarloWithinThreeStandardErrors) {
  const FiniteChainModel c = softmax_three_state_chain();
  const double exact = exact_fisher_information(c, 0.4, 0.0, 50);
  FisherOptions opt{FisherMode::MonteCarlo, 2000};
  const RateSequence r = fisher_and_rate(c, 0.4, 0.0, 50, opt, 99);
  ASSERT_GT(r.standard_error, 0.0);
  EXPECT_LT(std::fabs(r.fisher_information - exact), 3.0 * r.standard_error);
}

TEST(FisherAndRate, ThetaFreeChainThrows) {
  const FiniteChainModel c = constant_chain({{0.2, 0.8}, {0.6, 0.4}});
  EXPECT_THROW(fisher_and_rate(c, 0.0, 0.0, 10, {}), NonpositiveFisher);
}

TEST(DeltaN, HandExampleAllZeros) {
  const FiniteChainModel c = symmetric_two_state_chain();
  const RateSequence r = fisher_and_rate(c, 0.3, 0.0, 2, {});
  const double d = delta_n(sample_of({0, 0, 0}), c, 0.3, r, CounterStream(0, 0));
  EXPECT_NEAR(d, -0.9258200997725514, 1e-13);
}

TEST(DeltaN, AlternatingPath) {
  const FiniteChainModel c = symmetric_two_state_chain();
  const RateSequence r = fisher_and_rate(c, 0.3, 0.0, 4, {});
  const double d = delta_n(sample_of({0, 1, 0, 1, 0}), c, 0.3, r, CounterStream(0, 0));
  EXPECT_NEAR(d, r.rate * 4.0 / 0.3, 1e-13);
}

TEST(LoglikRatio, DecompositionIdentity) {
  const FiniteChainModel c = softmax_three_state_chain();
  const DiscreteSample s = draw(c, 0.4, 300, 5);
  const RateSequence r = fisher_and_rate(c, 0.4, 0.0, 300, {});
  for (double u : {-2.0, -0.5, 1.0, 2.0}) {
    const LoglikResult res = loglik_ratio(s, c, 0.4, u, r, CounterStream(0, 0));
    const LanDecomposition& d = res.decomposition;
    EXPECT_NEAR(res.log_z_direct, d.log_Z, 1e-12);
    EXPECT_NEAR(d.log_Z, u * d.delta_n - 0.5 * u * u + d.psi_n, 1e-12);
  }
}

TEST(LoglikRatio, MatchesProductOfMatrixEntries) {
  const FiniteChainModel c = symmetric_two_state_chain();
  const DiscreteSample s = sample_of({0, 0, 1, 1, 0, 1});
  const RateSequence r = fisher_and_rate(c, 0.3, 0.0, 5, {});
  const double u = 0.7;
  const double t1 = 0.3 + r.rate * u;
  const ChainMatrices a = c.matrices(t1), b = c.matrices(0.3);
  double expected = 0.0;
  for (std::size_t j = 1; j < s.values.size(); ++j) {
    const auto x = static_cast<std::size_t>(s.values[j - 1]);
    const auto y = static_cast<std::size_t>(s.values[j]);
    expected += std::log(a.at(x, y)) - std::log(b.at(x, y));
  }
  EXPECT_NEAR(loglik_ratio(s, c, 0.3, u, r, CounterStream(0, 0)).log_z_direct, expected, 1e-13);
}

TEST(LoglikRatio, ZeroShiftGivesZero) {
  const FiniteChainModel c = softmax_three_state_chain();
  const DiscreteSample s = draw(c, 0.4, 50, 6);
  const RateSequence r = fisher_and_rate(c, 0.4, 0.0, 50, {});
  const LoglikResult res = loglik_ratio(s, c, 0.4, 0.0, r, CounterStream(0, 0));
  EXPECT_EQ(res.log_z_direct, 0.0);
  EXPECT_EQ(res.decomposition.psi_n, 0.0);
  const ZetaDiagnostics z = zeta_diagnostics(s, c, 0.4, 0.0, r, CounterStream(0, 0));
  EXPECT_EQ(z.sum_zeta_sq, 0.0);
  EXPECT_EQ(z.max_abs_zeta, 0.0);
  EXPECT_EQ(z.centered_combo, 0.0);
}

TEST(ZetaDiagnostics, MatchDirectComputation) {
  const FiniteChainModel c = softmax_three_state_chain();
  const DiscreteSample s = draw(c, 0.4, 200, 7);
  const RateSequence r = fisher_and_rate(c, 0.4, 0.0, 200, {});
  const double u = 1.5;
  const ChainMatrices a = c.matrices(0.4 + r.rate * u), b = c.matrices(0.4);
  double sq = 0.0, mx = 0.0, cube = 0.0, lin = 0.0, sum_g = 0.0;
  for (std::size_t j = 1; j < s.values.size(); ++j) {
    const auto x = static_cast<std::size_t>(s.values[j - 1]);
    const auto y = static_cast<std::size_t>(s.values[j]);
    const double z = std::sqrt(a.at(x, y) / b.at(x, y)) - 1.0;
    sq += z * z;
    mx = std::max(mx, std::fabs(z));
    cube += std::fabs(z * z * z);
    lin += z;
    sum_g += b.d_at(x, y) / b.at(x, y);
  }
  const ZetaDiagnostics d = zeta_diagnostics(s, c, 0.4, u, r, CounterStream(0, 0));
  EXPECT_NEAR(d.sum_zeta_sq, sq, 1e-13);
  EXPECT_NEAR(d.max_abs_zeta, mx, 1e-15);
  EXPECT_NEAR(d.sum_abs_zeta_cubed, cube, 1e-14);
  EXPECT_NEAR(d.centered_combo, 2.0 * lin - r.rate * u * sum_g, 1e-12);
  EXPECT_TRUE(std::isfinite(d.cond_sum_zeta_sq));
}

TEST(AnalyseSample, AgreesWithSingleCalls) {
  const FiniteChainModel c = symmetric_two_state_chain();
  const DiscreteSample s = draw(c, 0.3, 100, 8);
  const RateSequence r = fisher_and_rate(c, 0.3, 0.0, 100, {});
  const std::vector<double> us{-1.0, 2.0};
  const SampleAnalysis a = analyse_sample(s, c, 0.3, us, r, CounterStream(0, 0));
  EXPECT_NEAR(a.delta_n, delta_n(s, c, 0.3, r, CounterStream(0, 0)), 1e-14);
  EXPECT_NEAR(a.delta_n, r.rate * a.sum_g, 1e-14);
  for (std::size_t k = 0; k < us.size(); ++k) {
    const LoglikResult res = loglik_ratio(s, c, 0.3, us[k], r, CounterStream(0, 0));
    EXPECT_NEAR(a.lan[k].log_Z, res.log_z_direct, 1e-12);
    EXPECT_NEAR(a.zeta[k].sum_zeta_sq,
                zeta_diagnostics(s, c, 0.3, us[k], r, CounterStream(0, 0)).sum_zeta_sq, 1e-14);
  }
}

TEST(LanExperiment, RejectsTooFewReplications) {
  const FiniteChainModel c = symmetric_two_state_chain();
  const std::vector<double> us{1.0};
  EXPECT_THROW(lan_experiment(c, 0.3, 0.0, 50, us, 99, 1), std::invalid_argument);
}

TEST(LanExperiment, IndependentOfThreadCount) {
  const FiniteChainModel c = softmax_three_state_chain();
  const std::vector<double> us{-1.0, 1.0};
  const LanReport a = lan_experiment(c, 0.4, 0.0, 200, us, 120, 2024);
  const harness::ThreadPoolExecutor pool(4);
  const LanReport b = lan_experiment(c, 0.4, 0.0, 200, us, 120, 2024, {}, pool);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].delta_n, b.records[i].delta_n);
    EXPECT_EQ(a.records[i].lan[1].log_Z, b.records[i].lan[1].log_Z);
  }
  EXPECT_EQ(a.ks.statistic, b.ks.statistic);
}

TEST(LanExperiment, DeltaApproximatelyStandardNormal) {
  const FiniteChainModel c = symmetric_two_state_chain();
  const std::vector<double> us{1.0};
  const LanReport rep = lan_experiment(c, 0.3, 0.0, 1000, us, 400, 77);
  EXPECT_EQ(rep.discarded, 0u);
  EXPECT_FALSE(rep.fatal);
  EXPECT_LT(std::fabs(rep.delta_mean), 4.0 * rep.delta_se);
  EXPECT_NEAR(rep.delta_variance, 1.0, 0.25);
  EXPECT_GT(rep.ks.p_value, 1e-3);
  ASSERT_EQ(rep.psi.size(), 1u);
  EXPECT_LT(rep.psi[0].median_abs_psi, 0.1);
}

TEST(ConditionStats, ExactChainRates) {
  const FiniteChainModel c = symmetric_two_state_chain();
  const std::vector<std::size_t> grid{100, 1000};
  ConditionOptions opt;
  opt.replications = 200;
  const auto rows = condition_stats(c, 0.3, 0.0, grid, opt, 3);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& row : rows) {
    EXPECT_LT(std::fabs(row.cond3_mean - 1.0), 4.0 * row.cond3_se + 1e-12);
    EXPECT_TRUE(std::isfinite(row.cond4_exact));
  }
  EXPECT_NEAR(rows[1].cond4_exact / rows[0].cond4_exact, 0.1, 0.01);
  EXPECT_LT(rows[1].cond5, rows[0].cond5);
}
