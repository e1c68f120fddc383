#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "rzq/errors.hpp"

namespace rzq {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = std::numeric_limits<double>::infinity();
  double rms = 0.0;
  std::size_t points = 0;
  bool dropped_first = false;
};

/// Ordinary least squares y = a + b x.
inline LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw DegenerateInputError("line fit needs at least two (x, y) pairs");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw DegenerateInputError("line fit with identical abscissae");
  LinearFit f;
  f.points = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ssr += r * r;
  }
  f.rms = std::sqrt(ssr / static_cast<double>(n));
  if (n > 2) f.stderr_slope = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
  return f;
}

/// Slope of log(y) against log(x). The point with the smallest x is dropped
/// when, measured against the fit through the other points, its residual
/// exceeds three times that fit's RMS (pre-asymptotic guard). An RMS taken
/// with the point included could never trigger this below ten points. At least
/// five points are needed, so four remain, and residuals under 1e-6 in log
/// units never count.
inline LinearFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DegenerateInputError("log-log fit: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(y[i])) {
      throw DegenerateInputError("log-log fit needs positive finite data");
    }
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  LinearFit f = least_squares(lx, ly);
  if (lx.size() >= 5) {
    std::size_t first = 0;
    for (std::size_t i = 1; i < lx.size(); ++i)
      if (lx[i] < lx[first]) first = i;
    std::vector<double> rx = lx, ry = ly;
    rx.erase(rx.begin() + static_cast<std::ptrdiff_t>(first));
    ry.erase(ry.begin() + static_cast<std::ptrdiff_t>(first));
    const LinearFit rest = least_squares(rx, ry);
    const double r = std::abs(ly[first] - (rest.intercept + rest.slope * lx[first]));
    if (r > 1e-6 && r > 3.0 * rest.rms) {
      f = rest;
      f.dropped_first = true;
    }
  }
  return f;
}

}  // namespace rzq
