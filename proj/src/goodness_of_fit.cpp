#include "lanlab/goodness_of_fit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace lanlab {

namespace {

using Matrix = std::vector<double>;

Matrix multiply(const Matrix& a, const Matrix& b, int m) {
  Matrix c(static_cast<std::size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < m; ++k) {
      const double aik = a[i * m + k];
      if (aik == 0.0) continue;
      for (int j = 0; j < m; ++j) c[i * m + j] += aik * b[k * m + j];
    }
  }
  return c;
}

/// a^n with a running base-10 exponent to avoid overflow.
void matrix_power(const Matrix& a, int n, int m, Matrix& out, int& exponent) {
  if (n == 1) {
    out = a;
    exponent = 0;
    return;
  }
  matrix_power(a, n / 2, m, out, exponent);
  Matrix sq = multiply(out, out, m);
  int e = 2 * exponent;
  if (n % 2 == 0) {
    out = std::move(sq);
  } else {
    out = multiply(a, sq, m);
  }
  exponent = e;
  if (out[(m / 2) * m + m / 2] > 1e140) {
    for (double& v : out) v *= 1e-140;
    exponent += 140;
  }
}

double ad_asymptotic(double z) {
  if (z < 2.0) {
    return std::exp(-1.2337141 / z) / std::sqrt(z) *
           (2.00012 +
            (0.247105 -
             (0.0649821 - (0.0347962 - (0.011672 - 0.00168691 * z) * z) * z) * z) * z);
  }
  return std::exp(-std::exp(
      1.0776 -
      (2.30695 - (0.43424 - (0.082433 - (0.008056 - 0.0003146 * z) * z) * z) * z) * z));
}

double ad_finite_correction(double n, double x) {
  if (x > 0.8) {
    return (-130.2137 +
            (745.2337 - (1705.091 - (1950.646 - (1116.360 - 255.7844 * x) * x) * x) * x) * x) /
           n;
  }
  const double cut = 0.01265 + 0.1757 / n;
  if (x < cut) {
    double t = x / cut;
    t = std::sqrt(t) * (1.0 - t) * (49.0 * t - 102.0);
    return t * (0.0037 / (n * n) + 0.00078 / n + 0.00006) / n;
  }
  double t = (x - cut) / (0.8 - cut);
  t = -0.00022633 +
      (6.54034 - (14.6538 - (14.458 - (8.259 - 1.91864 * t) * t) * t) * t) * t;
  return t * (0.04213 + 0.01365 / n) / n;
}

std::vector<double> sorted_copy(std::span<const double> sample) {
  if (sample.empty()) throw std::invalid_argument("normality test: empty sample");
  for (double v : sample) {
    if (!std::isfinite(v)) throw std::invalid_argument("normality test: non-finite value");
  }
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  return x;
}

}  // namespace

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double kolmogorov_cdf(std::size_t n_size, double d) {
  if (n_size < 1) throw std::invalid_argument("kolmogorov_cdf: n must be >= 1");
  if (d <= 0.0) return 0.0;
  if (d >= 1.0) return 1.0;
  const int n = static_cast<int>(n_size);
  const double s = d * d * n;
  if (s > 7.24 || (s > 3.76 && n > 99)) {
    return 1.0 - 2.0 * std::exp(-(2.000071 + 0.331 / std::sqrt(1.0 * n) + 1.409 / n) * s);
  }
  const int k = static_cast<int>(n * d) + 1;
  const int m = 2 * k - 1;
  const double h = k - n * d;
  Matrix H(static_cast<std::size_t>(m) * m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) H[i * m + j] = (i - j + 1 < 0) ? 0.0 : 1.0;
  }
  for (int i = 0; i < m; ++i) {
    H[i * m] -= std::pow(h, i + 1);
    H[(m - 1) * m + i] -= std::pow(h, m - i);
  }
  H[(m - 1) * m] += (2.0 * h - 1.0 > 0.0 ? std::pow(2.0 * h - 1.0, m) : 0.0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i - j + 1 > 0) {
        for (int g = 1; g <= i - j + 1; ++g) H[i * m + j] /= g;
      }
    }
  }
  Matrix Q;
  int eQ = 0;
  matrix_power(H, n, m, Q, eQ);
  double v = Q[(k - 1) * m + k - 1];
  for (int i = 1; i <= n; ++i) {
    v = v * i / n;
    if (v < 1e-140) {
      v *= 1e140;
      eQ -= 140;
    }
  }
  return std::clamp(v * std::pow(10.0, eQ), 0.0, 1.0);
}

double anderson_darling_cdf(std::size_t n, double z) {
  if (n < 1) throw std::invalid_argument("anderson_darling_cdf: n must be >= 1");
  if (z <= 0.0) return 0.0;
  const double x = ad_asymptotic(z);
  return std::clamp(x + ad_finite_correction(static_cast<double>(n), x), 0.0, 1.0);
}

NormalityTest ks_normal(std::span<const double> sample) {
  const std::vector<double> x = sorted_copy(sample);
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = standard_normal_cdf(x[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, 1.0 - kolmogorov_cdf(x.size(), d)};
}

NormalityTest ad_normal(std::span<const double> sample) {
  const std::vector<double> x = sorted_copy(sample);
  const std::size_t n = x.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // log F and log(1 - F) from erfc directly to keep the tails accurate.
    const double log_f = std::log(0.5 * std::erfc(-x[i] / std::numbers::sqrt2));
    const double log_sf = std::log(0.5 * std::erfc(x[n - 1 - i] / std::numbers::sqrt2));
    acc += (2.0 * static_cast<double>(i) + 1.0) * (log_f + log_sf);
  }
  const double a2 = -static_cast<double>(n) - acc / static_cast<double>(n);
  return {a2, 1.0 - anderson_darling_cdf(n, a2)};
}

}  // namespace lanlab
