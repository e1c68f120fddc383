#pragma once

#include <atomic>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rzq/fft.hpp"
#include "rzq/grid.hpp"

namespace rzq {

/// Fourier coefficients for k = 0 .. N/2 under the convention
/// u_hat(k) = (1/L) * integral_0^L u(x) exp(-i 2 pi k x / L) dx.
/// Negative modes are the conjugates; the Nyquist entry is real.
using Spectrum = std::vector<std::complex<double>>;

/// A real function on a periodic grid, held in physical space, spectral space,
/// or both. Whichever representation is missing is computed on first access.
/// Fields are immutable and cheap to copy; copies share the cached transform.
class PeriodicField {
 public:
  PeriodicField(Grid grid, std::vector<double> values)
      : state_(std::make_shared<State>(std::move(grid))) {
    if (values.size() != state_->grid.size()) {
      throw ConfigError("field has " + std::to_string(values.size()) + " values, grid has " +
                        std::to_string(state_->grid.size()) + " nodes");
    }
    state_->values = std::move(values);
    std::call_once(state_->values_once, [] {});
    state_->values_ready.store(true, std::memory_order_release);
  }

  static PeriodicField from_spectrum(Grid grid, Spectrum coefficients) {
    if (coefficients.size() != grid.spectrum_size()) {
      throw ConfigError("spectrum has " + std::to_string(coefficients.size()) +
                        " entries, grid expects " + std::to_string(grid.spectrum_size()));
    }
    PeriodicField f(std::make_shared<State>(std::move(grid)));
    f.state_->spectrum = std::move(coefficients);
    f.state_->spectrum[0].imag(0.0);
    f.state_->spectrum.back().imag(0.0);
    std::call_once(f.state_->spectrum_once, [] {});
    f.state_->spectrum_ready.store(true, std::memory_order_release);
    return f;
  }

  static PeriodicField zeros(const Grid& grid) {
    return from_spectrum(grid, Spectrum(grid.spectrum_size()));
  }

  static PeriodicField constant(const Grid& grid, double c) {
    Spectrum s(grid.spectrum_size());
    s[0] = c;
    return from_spectrum(grid, std::move(s));
  }

  /// Samples f(x) at the nodes x_i = i L / N.
  template <class F>
  static PeriodicField sample(const Grid& grid, F&& f) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.node(i));
    return PeriodicField(grid, std::move(v));
  }

  /// Samples f at node coordinates folded into [-L/2, L/2).
  template <class F>
  static PeriodicField sample_centered(const Grid& grid, F&& f) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.centered_node(i));
    return PeriodicField(grid, std::move(v));
  }

  const Grid& grid() const noexcept { return state_->grid; }
  std::size_t size() const noexcept { return state_->grid.size(); }

  std::span<const double> values() const {
    State& s = *state_;
    std::call_once(s.values_once, [&s] {
      s.values.resize(s.grid.size());
      detail::Fft::backward(s.spectrum, s.values);
      s.values_ready.store(true, std::memory_order_release);
    });
    return s.values;
  }

  std::span<const std::complex<double>> spectrum() const {
    State& s = *state_;
    std::call_once(s.spectrum_once, [&s] {
      s.spectrum.resize(s.grid.spectrum_size());
      detail::Fft::forward(s.values, s.spectrum);
      const double inv = 1.0 / static_cast<double>(s.grid.size());
      for (auto& c : s.spectrum) c *= inv;
      s.spectrum[0].imag(0.0);
      s.spectrum.back().imag(0.0);
      s.spectrum_ready.store(true, std::memory_order_release);
    });
    return s.spectrum;
  }

  /// Coefficient of mode k for any k in [-N/2, N/2].
  std::complex<double> coefficient(long k) const {
    const long half = static_cast<long>(size() / 2);
    if (k < -half || k > half) throw DomainError("mode index out of range: " + std::to_string(k));
    auto s = spectrum();
    return k >= 0 ? s[static_cast<std::size_t>(k)] : std::conj(s[static_cast<std::size_t>(-k)]);
  }

  double mean() const { return spectrum()[0].real(); }

  bool has_spectrum() const noexcept { return state_->spectrum_ready.load(std::memory_order_acquire); }
  bool has_values() const noexcept { return state_->values_ready.load(std::memory_order_acquire); }

  friend PeriodicField operator+(const PeriodicField& a, const PeriodicField& b) {
    return combine(1.0, a, 1.0, b);
  }
  friend PeriodicField operator-(const PeriodicField& a, const PeriodicField& b) {
    return combine(1.0, a, -1.0, b);
  }
  friend PeriodicField operator*(double c, const PeriodicField& a) {
    if (a.has_spectrum()) {
      auto s = a.spectrum();
      Spectrum out(s.begin(), s.end());
      for (auto& z : out) z *= c;
      return from_spectrum(a.grid(), std::move(out));
    }
    auto v = a.values();
    std::vector<double> out(v.begin(), v.end());
    for (auto& x : out) x *= c;
    return PeriodicField(a.grid(), std::move(out));
  }
  friend PeriodicField operator-(const PeriodicField& a) { return -1.0 * a; }

  /// ca * a + cb * b, computed in whichever space both operands already occupy.
  static PeriodicField combine(double ca, const PeriodicField& a, double cb, const PeriodicField& b) {
    if (!(a.grid() == b.grid())) throw ConfigError("fields live on different grids");
    if (a.has_spectrum() && b.has_spectrum()) {
      auto sa = a.spectrum();
      auto sb = b.spectrum();
      Spectrum out(sa.size());
      for (std::size_t k = 0; k < out.size(); ++k) out[k] = ca * sa[k] + cb * sb[k];
      return from_spectrum(a.grid(), std::move(out));
    }
    auto va = a.values();
    auto vb = b.values();
    std::vector<double> out(va.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = ca * va[i] + cb * vb[i];
    return PeriodicField(a.grid(), std::move(out));
  }

 private:
  struct State {
    explicit State(Grid g) : grid(std::move(g)) {}
    Grid grid;
    std::vector<double> values;
    Spectrum spectrum;
    std::once_flag values_once;
    std::once_flag spectrum_once;
    std::atomic<bool> values_ready{false};
    std::atomic<bool> spectrum_ready{false};
  };

  explicit PeriodicField(std::shared_ptr<State> s) : state_(std::move(s)) {}

  std::shared_ptr<State> state_;
};

/// Half spectrum of f (k = 0 .. N/2).
inline Spectrum to_spectrum(const PeriodicField& f) {
  auto s = f.spectrum();
  return Spectrum(s.begin(), s.end());
}

inline PeriodicField from_spectrum(Spectrum coefficients, const Grid& grid) {
  return PeriodicField::from_spectrum(grid, std::move(coefficients));
}

}  // namespace rzq
