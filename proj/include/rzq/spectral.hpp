#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "rzq/field.hpp"

namespace rzq {

/// Multiplies the spectrum of f by symbol(k) at every grid wavenumber k >= 0.
///
/// Negative modes follow by conjugation, i.e. symbol(-k) = conj(symbol(k)) is
/// assumed (the only case that keeps the field real). The Nyquist mode is
/// scaled by Re symbol(k_max), which zeroes it for odd symbols such as ik.
template <class Symbol>
PeriodicField apply_multiplier(const PeriodicField& f, Symbol&& symbol) {
  const Grid& g = f.grid();
  auto in = f.spectrum();
  Spectrum out(in.size());
  const std::size_t nyquist = in.size() - 1;
  for (std::size_t k = 0; k < in.size(); ++k) {
    const double kt = g.wavenumber(static_cast<long>(k));
    const std::complex<double> m(symbol(kt));
    if (!std::isfinite(m.real()) || !std::isfinite(m.imag())) {
      std::ostringstream os;
      os << "multiplier symbol is not finite at wavenumber " << kt;
      throw DomainError(os.str());
    }
    out[k] = k == nyquist ? in[k] * m.real() : in[k] * m;
  }
  return PeriodicField::from_spectrum(g, std::move(out));
}

/// lambda^r = (1 - d^2/dx^2)^{r/2}, the Bessel potential of order r.
inline PeriodicField lambda_pow(const PeriodicField& f, double r) {
  if (r == 0.0) return f;
  if (r == 2.0) return apply_multiplier(f, [](double k) { return 1.0 + k * k; });
  if (r == -2.0) return apply_multiplier(f, [](double k) { return 1.0 / (1.0 + k * k); });
  if (r == -4.0) {
    return apply_multiplier(f, [](double k) {
      const double w = 1.0 + k * k;
      return 1.0 / (w * w);
    });
  }
  return apply_multiplier(f, [r](double k) { return std::pow(1.0 + k * k, 0.5 * r); });
}

/// Spectral derivative of order j (0 <= j <= 4); odd orders drop the Nyquist mode.
inline PeriodicField derivative(const PeriodicField& f, int order = 1) {
  if (order < 0 || order > 4) throw DomainError("derivative order must be in [0, 4], got " + std::to_string(order));
  if (order == 0) return f;
  return apply_multiplier(f, [order](double k) {
    const std::complex<double> ik(0.0, k);
    std::complex<double> m(1.0, 0.0);
    for (int j = 0; j < order; ++j) m *= ik;
    return m;
  });
}

/// Pointwise product a*b with 3/2-rule zero padding, so the N retained modes of
/// the result equal those of the exact product (no aliasing).
inline PeriodicField product(const PeriodicField& a, const PeriodicField& b) {
  const Grid& g = a.grid();
  if (!(g == b.grid())) throw ConfigError("product of fields on different grids");
  const std::size_t n = g.size();
  const std::size_t m = 3 * n / 2;
  const std::size_t half = n / 2;

  auto pad = [&](std::span<const std::complex<double>> s) {
    Spectrum p(m / 2 + 1);
    std::copy(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(half), p.begin());
    // The Nyquist entry stands for c cos(N x / 2): split evenly between +-N/2.
    p[half] = 0.5 * s[half];
    std::vector<double> v(m);
    detail::Fft::backward(p, v);
    return v;
  };
  std::vector<double> va = pad(a.spectrum());
  const std::vector<double> vb = pad(b.spectrum());
  for (std::size_t i = 0; i < m; ++i) va[i] *= vb[i];

  Spectrum full(m / 2 + 1);
  detail::Fft::forward(va, full);
  const double inv = 1.0 / static_cast<double>(m);
  Spectrum out(half + 1);
  for (std::size_t k = 0; k < half; ++k) out[k] = full[k] * inv;
  out[half] = 2.0 * full[half].real() * inv;
  return PeriodicField::from_spectrum(g, std::move(out));
}

/// Trigonometric interpolation of f onto another grid of the same box length:
/// zero padding when refining, truncation when coarsening.
inline PeriodicField resample(const PeriodicField& f, const Grid& target) {
  const Grid& g = f.grid();
  if (g.length() != target.length()) throw ConfigError("resample needs equal box lengths");
  if (g == target) return f;
  auto in = f.spectrum();
  Spectrum out(target.spectrum_size());
  const std::size_t src_half = g.size() / 2;
  const std::size_t dst_half = target.size() / 2;
  if (dst_half > src_half) {
    std::copy(in.begin(), in.begin() + static_cast<std::ptrdiff_t>(src_half), out.begin());
    out[src_half] = 0.5 * in[src_half];
  } else {
    std::copy(in.begin(), in.begin() + static_cast<std::ptrdiff_t>(dst_half), out.begin());
    out[dst_half] = 2.0 * in[dst_half].real();
  }
  return PeriodicField::from_spectrum(target, std::move(out));
}

/// ( sum_k (1 + k^2)^s |u_hat(k)|^2 )^{1/2} over all modes k in [-N/2, N/2).
inline double sobolev_norm(const PeriodicField& f, double s) {
  const Grid& g = f.grid();
  auto c = f.spectrum();
  const std::size_t nyquist = c.size() - 1;
  double sum = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double kt = g.wavenumber(static_cast<long>(k));
    const double w = s == 0.0 ? 1.0 : std::pow(1.0 + kt * kt, s);
    const double mult = (k == 0 || k == nyquist) ? 1.0 : 2.0;
    sum += mult * w * std::norm(c[k]);
  }
  return std::sqrt(sum);
}

/// Sobolev norm scaled to match the integral over one period,
/// ( integral |lambda^s f|^2 dx )^{1/2}. On a large box this is the real-line norm.
inline double sobolev_norm_integral(const PeriodicField& f, double s) {
  return std::sqrt(f.grid().length()) * sobolev_norm(f, s);
}

inline double l2_norm(const PeriodicField& f) { return sobolev_norm(f, 0.0); }

inline double sup_norm(const PeriodicField& f) {
  double m = 0.0;
  for (double x : f.values()) m = std::max(m, std::abs(x));
  return m;
}

/// max over j = 0..k of max_i |d^j f / dx^j (x_i)|.
inline double sup_norms(const PeriodicField& f, int k) {
  if (k < 0 || k > 3) throw DomainError("C^k norm supports k in [0, 3], got " + std::to_string(k));
  double m = sup_norm(f);
  for (int j = 1; j <= k; ++j) m = std::max(m, sup_norm(derivative(f, j)));
  return m;
}

/// Fraction of the H^s energy carried by modes with |k| >= N/3.
inline double top_third_energy_fraction(const PeriodicField& f, double s) {
  const Grid& g = f.grid();
  auto c = f.spectrum();
  const std::size_t nyquist = c.size() - 1;
  const std::size_t cut = g.size() / 3;
  double total = 0.0;
  double top = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double kt = g.wavenumber(static_cast<long>(k));
    const double mult = (k == 0 || k == nyquist) ? 1.0 : 2.0;
    const double e = mult * std::pow(1.0 + kt * kt, s) * std::norm(c[k]);
    total += e;
    if (k >= cut) top += e;
  }
  return total > 0.0 ? top / total : 0.0;
}

namespace detail {
// Shortest text that reads back to the same double.
inline std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}
}  // namespace detail

/// CSV with header "x,u".
inline void write_field_csv(std::ostream& os, const PeriodicField& f) {
  os << "x,u\n";
  auto v = f.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    os << detail::format_double(f.grid().node(i)) << ',' << detail::format_double(v[i]) << '\n';
  }
}

/// CSV with header "k,re,im" for k in [-N/2, N/2).
inline void write_spectrum_csv(std::ostream& os, const PeriodicField& f) {
  os << "k,re,im\n";
  const long half = static_cast<long>(f.size() / 2);
  for (long k = -half; k < half; ++k) {
    const auto c = f.coefficient(k);
    os << k << ',' << detail::format_double(c.real()) << ',' << detail::format_double(c.imag()) << '\n';
  }
}

}  // namespace rzq
