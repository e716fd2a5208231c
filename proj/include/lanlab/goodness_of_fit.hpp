#pragma once

#include <cstddef>
#include <span>

namespace lanlab {

struct NormalityTest {
  double statistic = 0.0;
  double p_value = 1.0;
};

double standard_normal_cdf(double x);

/// P(D_n < d) for the one-sample Kolmogorov statistic (Marsaglia, Tsang and
/// Wang 2003), with their right-tail shortcut for large n d^2.
double kolmogorov_cdf(std::size_t n, double d);

/// P(A_n^2 < z) for a uniform sample (Marsaglia and Marsaglia 2004).
double anderson_darling_cdf(std::size_t n, double z);

/// Kolmogorov-Smirnov test against N(0, 1).
NormalityTest ks_normal(std::span<const double> sample);

/// Anderson-Darling test against N(0, 1).
NormalityTest ad_normal(std::span<const double> sample);

}  // namespace lanlab
