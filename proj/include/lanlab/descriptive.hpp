#pragma once

#include <span>
#include <vector>

namespace lanlab {

double mean(std::span<const double> x);
/// Unbiased sample variance; 0 for fewer than two values.
double sample_variance(std::span<const double> x);
double standard_error(std::span<const double> x);
/// Linear-interpolation quantile (type 7) of an unsorted sample.
double quantile(std::span<const double> x, double prob);
double median(std::span<const double> x);

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  /// Root-mean-square residual.
  double residual = 0.0;
};

/// Ordinary least squares y = intercept + slope * x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Slope of log y against log x.
double log_log_slope(std::span<const double> x, std::span<const double> y);

}  // namespace lanlab
