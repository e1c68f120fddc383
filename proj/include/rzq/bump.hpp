#pragma once

#include <cmath>

namespace rzq {

/// C-infinity step: 0 for t <= 0, 1 for t >= 1, built from psi(t) = exp(-1/t).
inline double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

/// Even flat-top bump: 1 for |x| <= plateau, 0 for |x| >= support.
inline double plateau_bump(double x, double plateau, double support) {
  const double ax = std::abs(x);
  if (ax <= plateau) return 1.0;
  if (ax >= support) return 0.0;
  return 1.0 - smooth_step((ax - plateau) / (support - plateau));
}

/// d/dt smooth_step(t).
inline double smooth_step_derivative(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  const double d = a + b;
  return a * b * (1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t))) / (d * d);
}

/// d/dx plateau_bump(x, plateau, support).
inline double plateau_bump_derivative(double x, double plateau, double support) {
  const double ax = std::abs(x);
  if (ax <= plateau || ax >= support) return 0.0;
  const double w = support - plateau;
  const double d = -smooth_step_derivative((ax - plateau) / w) / w;
  return x < 0.0 ? -d : d;
}

}  // namespace rzq
