#pragma once

#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rzq/errors.hpp"

namespace rzq {

namespace detail {
// Bisects until the Kronrod error estimate drops below tol (absolute).
template <class F>
double gk_adaptive(F& f, double a, double b, double tol, int depth) {
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &err);
  if (err <= tol || depth == 0) return v;
  const double m = 0.5 * (a + b);
  return gk_adaptive(f, a, m, 0.5 * tol, depth - 1) + gk_adaptive(f, m, b, 0.5 * tol, depth - 1);
}
}  // namespace detail

/// Adaptive Gauss-Kronrod (15 point) on each panel [breaks[i], breaks[i+1]] with
/// an absolute tolerance shared between panels. Panels let the caller place kinks
/// on boundaries and keep oscillations per panel bounded.
template <class F>
double integrate_panels(F&& f, const std::vector<double>& breaks, double abs_tol = 1e-10) {
  if (breaks.size() < 2) throw ConfigError("quadrature needs at least one panel");
  const double per_panel = abs_tol / static_cast<double>(breaks.size() - 1);
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) sum += detail::gk_adaptive(f, breaks[i], breaks[i + 1], per_panel, 20);
  return sum;
}

/// Uniform breakpoints a, a+h, ..., b with h <= max_width.
inline std::vector<double> uniform_breaks(double a, double b, double max_width) {
  const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / max_width)));
  std::vector<double> out(n + 1);
  for (std::size_t i = 0; i <= n; ++i) out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n);
  out.back() = b;
  return out;
}

/// 0, 1, 2, 4, 8, ... capped by R (R itself is the last break).
inline std::vector<double> geometric_breaks(double R) {
  std::vector<double> out{0.0};
  for (double b = 1.0; b < R; b *= 2.0) out.push_back(b);
  out.push_back(R);
  return out;
}

}  // namespace rzq
