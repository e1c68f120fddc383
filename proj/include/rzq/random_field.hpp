#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "rzq/field.hpp"

namespace rzq {

/// SplitMix64 finalizer; derives independent stream seeds from (master, index).
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Standard normal draws by Box-Muller on top of mt19937_64, so the stream is
/// identical across standard libraries.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Random field with u_hat(k) = zeta_k (1 + k^2)^{-(s+1)/2} for |k| <= band_limit,
/// zeta_k complex unit Gaussian. Modes are drawn in increasing |k|, so the same
/// seed produces the same low modes on every grid size.
inline PeriodicField random_field(const Grid& grid, double regularity, std::uint64_t seed,
                                  std::size_t band_limit, bool zero_mean = false) {
  const std::size_t limit = std::min(band_limit, grid.size() / 2 - 1);
  GaussianStream rng(seed);
  Spectrum c(grid.spectrum_size());
  for (std::size_t k = 0; k <= limit; ++k) {
    const double kt = grid.wavenumber(static_cast<long>(k));
    const double amp = std::pow(1.0 + kt * kt, -0.5 * (regularity + 1.0));
    const double re = rng.next();
    const double im = rng.next();
    if (k == 0) {
      c[k] = zero_mean ? 0.0 : amp * re;
    } else {
      c[k] = amp * std::complex<double>(re, im) * std::numbers::sqrt2 * 0.5;
    }
  }
  return PeriodicField::from_spectrum(grid, std::move(c));
}

/// Field with deterministic coefficients u_hat(k) = (1 + k^2)^{-decay/2} for 1 <= |k| < N/2,
/// sitting exactly at the edge of H^{decay - 1/2}.
inline PeriodicField power_law_field(const Grid& grid, double decay, double scale = 1.0) {
  Spectrum c(grid.spectrum_size());
  for (std::size_t k = 1; k + 1 < c.size(); ++k) {
    const double kt = grid.wavenumber(static_cast<long>(k));
    c[k] = scale * std::pow(1.0 + kt * kt, -0.5 * decay);
  }
  return PeriodicField::from_spectrum(grid, std::move(c));
}

}  // namespace rzq
