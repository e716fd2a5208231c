#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace lanlab::harness {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct LinePlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  /// Horizontal reference line; NaN for none.
  double reference_y = std::numeric_limits<double>::quiet_NaN();
};

/// Density-scaled histogram with the standard normal density overlaid.
std::string histogram_svg(std::span<const double> values, const std::string& title, std::size_t bins = 30);

/// Sample quantiles against standard normal quantiles, with the identity line.
std::string qq_svg(std::span<const double> values, const std::string& title);

std::string line_svg(const std::vector<Series>& series, const LinePlotOptions& options);

}  // namespace lanlab::harness
