#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lanlab/descriptive.hpp"
#include "lanlab/goodness_of_fit.hpp"
#include "lanlab/rng.hpp"

using namespace lanlab;

TEST(Descriptive, QuantileType7) {
  const std::vector<double> x{3, 1, 4, 1, 5, 9, 2, 6};
  EXPECT_NEAR(quantile(x, 0.1), 1.0, 1e-15);
  EXPECT_NEAR(quantile(x, 0.5), 3.5, 1e-15);
  EXPECT_NEAR(quantile(x, 0.9), 6.9, 1e-14);
  EXPECT_EQ(median(x), 3.5);
}

TEST(Descriptive, MeanVarianceStandardError) {
  const std::vector<double> x{2, 4, 4, 4, 5, 5, 7, 9};
  EXPECT_EQ(mean(x), 5.0);
  EXPECT_NEAR(sample_variance(x), 32.0 / 7.0, 1e-14);
  EXPECT_NEAR(standard_error(x), std::sqrt(32.0 / 7.0 / 8.0), 1e-14);
}

TEST(Descriptive, LineFitRecoversExactLine) {
  const std::vector<double> x{1, 2, 3, 4}, y{1, 3, 5, 7};
  const LineFit f = fit_line(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, -1.0, 1e-14);
  EXPECT_NEAR(f.residual, 0.0, 1e-14);
  const std::vector<double> n{100, 1000, 10000}, v{0.5, 0.05, 0.005};
  EXPECT_NEAR(log_log_slope(n, v), -1.0, 1e-12);
}

TEST(GoodnessOfFit, KolmogorovExactDistribution) {
  // Reference values: Durbin matrix evaluated in 60-digit arithmetic.
  EXPECT_NEAR(kolmogorov_cdf(10, 0.3), 0.7294644252, 1e-12);
  EXPECT_NEAR(kolmogorov_cdf(100, 0.1), 0.74730724299360987, 1e-12);
  EXPECT_NEAR(kolmogorov_cdf(500, 0.05), 0.84133736077938001, 1e-12);
  EXPECT_NEAR(kolmogorov_cdf(2000, 0.02), 0.60468662799690807, 1e-10);
}

TEST(GoodnessOfFit, AndersonDarlingAsymptoticPercentagePoints) {
  EXPECT_NEAR(anderson_darling_cdf(100000, 2.492), 0.95, 1.5e-3);
  EXPECT_NEAR(anderson_darling_cdf(100000, 3.857), 0.99, 1e-3);
  EXPECT_NEAR(anderson_darling_cdf(100000, 1.933), 0.90, 1.5e-3);
}

TEST(GoodnessOfFit, NormalSampleNotRejected) {
  CounterStream rng(123, 0);
  std::vector<double> x(2000);
  for (double& v : x) v = rng.normal();
  EXPECT_GT(ks_normal(x).p_value, 0.01);
  EXPECT_GT(ad_normal(x).p_value, 0.01);
}

TEST(GoodnessOfFit, ShiftedSampleRejected) {
  CounterStream rng(124, 0);
  std::vector<double> x(2000);
  for (double& v : x) v = rng.normal() + 0.3;
  EXPECT_LT(ks_normal(x).p_value, 1e-4);
  EXPECT_LT(ad_normal(x).p_value, 1e-4);
}

TEST(GoodnessOfFit, PValuesRoughlyUniformUnderNull) {
  int ks_low = 0, ad_low = 0;
  const int reps = 400;
  for (int r = 0; r < reps; ++r) {
    CounterStream rng(125, r);
    std::vector<double> x(200);
    for (double& v : x) v = rng.normal();
    ks_low += ks_normal(x).p_value < 0.1;
    ad_low += ad_normal(x).p_value < 0.1;
  }
  const double se = std::sqrt(reps * 0.09);
  EXPECT_NEAR(ks_low, 40, 3.5 * se);
  EXPECT_NEAR(ad_low, 40, 3.5 * se);
}

TEST(GoodnessOfFit, NormalCdf) {
  EXPECT_NEAR(standard_normal_cdf(0.0), 0.5, 1e-16);
  EXPECT_NEAR(standard_normal_cdf(1.959963984540054), 0.975, 1e-15);
  EXPECT_NEAR(standard_normal_cdf(-10.0), 7.6198530241605e-24, 1e-34);
}
