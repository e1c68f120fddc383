#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>

#include "rzq/errors.hpp"

namespace rzq {

/// Uniform grid on a torus of circumference `length`; node i sits at x_i = i L / N.
///
/// Mode k in [-N/2, N/2) has physical wavenumber 2 pi k / L. A box longer than
/// 2 pi is how the real line is approximated: data stay in the middle of the box
/// and the outer band is monitored for leakage.
class Grid {
 public:
  explicit Grid(std::size_t n_points, double box_length = 2.0 * std::numbers::pi)
      : n_(n_points), length_(box_length) {
    if (n_ < 8 || (n_ & (n_ - 1)) != 0) {
      throw ConfigError("grid size must be a power of two >= 8, got " + std::to_string(n_));
    }
    if (!(length_ > 0.0) || !std::isfinite(length_)) {
      throw ConfigError("box length must be positive and finite");
    }
  }

  std::size_t size() const noexcept { return n_; }
  /// Number of stored non-negative modes (k = 0 .. N/2).
  std::size_t spectrum_size() const noexcept { return n_ / 2 + 1; }
  double length() const noexcept { return length_; }
  double spacing() const noexcept { return length_ / static_cast<double>(n_); }
  double node(std::size_t i) const noexcept { return static_cast<double>(i) * spacing(); }

  /// Node coordinate folded into [-L/2, L/2), the frame used for data centred at 0.
  double centered_node(std::size_t i) const noexcept {
    const double x = node(i);
    return x < 0.5 * length_ ? x : x - length_;
  }

  double wavenumber(long k) const noexcept {
    return 2.0 * std::numbers::pi * static_cast<double>(k) / length_;
  }
  double max_wavenumber() const noexcept { return wavenumber(static_cast<long>(n_ / 2)); }

  friend bool operator==(const Grid& a, const Grid& b) noexcept {
    return a.n_ == b.n_ && a.length_ == b.length_;
  }

 private:
  std::size_t n_;
  double length_;
};

}  // namespace rzq
