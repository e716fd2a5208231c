#pragma once

#include <cmath>
#include <functional>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace lanlab::detail {

/// Adaptive Gauss-Kronrod on [a, b].
inline double integrate_gk(const std::function<double(double)>& f, double a, double b,
                           double rel_tol = 1e-12, unsigned max_depth = 20) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, max_depth,
                                                                       rel_tol);
}

/// int_a^b f(r) dr for 0 < a < b < inf, computed in s = log r. Integrands with
/// power-law behaviour near the origin become smooth exponentials in s.
inline double integrate_log_scale(const std::function<double(double)>& f, double a, double b,
                                  double rel_tol = 1e-12, unsigned max_depth = 20) {
  if (!(b > a) || !(a > 0.0)) return 0.0;
  auto g = [&f](double s) {
    const double r = std::exp(s);
    return f(r) * r;
  };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      g, std::log(a), std::log(b), max_depth, rel_tol);
}

/// Fixed 15-point Gauss-Kronrod rule in log scale; for short cells.
inline double integrate_log_cell(const std::function<double(double)>& f, double a, double b) {
  if (!(b > a) || !(a > 0.0)) return 0.0;
  auto g = [&f](double s) {
    const double r = std::exp(s);
    return f(r) * r;
  };
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(g, std::log(a),
                                                                       std::log(b), 0);
}

}  // namespace lanlab::detail
