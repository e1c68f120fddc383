#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <vector>

#include "rzq/errors.hpp"
#include "rzq/field.hpp"
#include "rzq/quadrature.hpp"
#include "rzq/spectral.hpp"

namespace rzq {

/// (c/2) e^{-|xi|} (1 + |xi|) with xi = x - c t.
inline double pseudo_peakon(double x, double c, double t = 0.0) {
  const double a = std::abs(x - c * t);
  return 0.5 * c * std::exp(-a) * (1.0 + a);
}

/// Integral of e^{-i x xi} pseudo_peakon(x, c, 0) dx over the line.
inline double pseudo_peakon_fourier(double xi, double c = 1.0) {
  const double d = 1.0 + xi * xi;
  return 2.0 * c / (d * d);
}

/// The same transform by quadrature over [-half_width, half_width]: the profile
/// is even, so only the cosine part survives.
inline double pseudo_peakon_fourier_quadrature(double xi, double c = 1.0, double half_width = 60.0) {
  auto f = [xi, c](double x) { return pseudo_peakon(x, c) * std::cos(xi * x); };
  const double width = std::min(1.0, 1.0 / std::max(1.0, std::abs(xi)) * 4.0);
  return 2.0 * integrate_panels(f, uniform_breaks(0.0, half_width, width), 1e-12);
}

/// 4 * integral over [-R, R] of (1+xi^2)^{s-4}, without the 1/(2 pi) factor.
inline double peakon_sobolev_norm_sq(double s, double R) {
  if (!(R > 0.0)) throw DomainError("truncation radius must be positive");
  const double e = s - 4.0;
  if (e == 0.0) return 8.0 * R;
  auto f = [e](double xi) { return std::pow(1.0 + xi * xi, e); };
  return 8.0 * integrate_panels(f, geometric_breaks(R), 1e-11);
}

enum class NormGrowth { bounded, unbounded };

struct NormGrowthClassification {
  NormGrowth verdict = NormGrowth::bounded;
  std::vector<double> radii;       // R_0, 2 R_0, 4 R_0, ...
  std::vector<double> increments;  // value(2R) - value(R) at each radius
  double last_increment_ratio = 0.0;
};

/// Classifies R -> peakon_sobolev_norm_sq(s, R) over successive doublings from
/// r_start to r_stop. Bounded when the doubling increments shrink geometrically
/// and eventually fall below `tol`; unbounded when they never decrease (each
/// doubling adds at least the first increment). Doubling stops at the first
/// increment below `tol`, before quadrature noise can dominate it.
inline NormGrowthClassification classify_norm_growth(double s, double r_start = 1e2, double r_stop = 1e21,
                                                     double tol = 1e-3) {
  NormGrowthClassification out;
  double prev = peakon_sobolev_norm_sq(s, r_start);
  for (double R = r_start; R < r_stop; R *= 2.0) {
    const double next = peakon_sobolev_norm_sq(s, 2.0 * R);
    out.radii.push_back(R);
    out.increments.push_back(next - prev);
    prev = next;
    if (out.increments.back() < tol) break;
  }
  const auto& inc = out.increments;
  bool shrinking = true;
  bool nondecreasing = true;
  for (std::size_t i = 1; i < inc.size(); ++i) {
    if (!(inc[i] < inc[i - 1])) shrinking = false;
    if (inc[i] < inc[0] * (1.0 - 1e-9)) nondecreasing = false;
  }
  out.last_increment_ratio = inc.size() > 1 ? inc.back() / inc[inc.size() - 2] : 0.0;
  if (shrinking && inc.back() < tol) out.verdict = NormGrowth::bounded;
  else if (nondecreasing && inc[0] > 0.0) out.verdict = NormGrowth::unbounded;
  else out.verdict = shrinking ? NormGrowth::bounded : NormGrowth::unbounded;
  return out;
}

struct PeakonEnsemble {
  std::vector<double> p;
  std::vector<double> q;

  std::size_t size() const { return p.size(); }
  void validate() const {
    if (p.size() != q.size()) throw ConfigError("peakon ensemble: p and q lengths differ");
    for (std::size_t i = 0; i < p.size(); ++i)
      if (!std::isfinite(p[i]) || !std::isfinite(q[i])) throw ConfigError("peakon ensemble: non-finite entry");
  }
};

/// H = 1/2 sum_{i,j} p_i p_j e^{-|q_i - q_j|}.
inline double hamiltonian(const PeakonEnsemble& e) {
  double h = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i)
    for (std::size_t j = 0; j < e.size(); ++j) h += e.p[i] * e.p[j] * std::exp(-std::abs(e.q[i] - e.q[j]));
  return 0.5 * h;
}

inline double total_momentum(const PeakonEnsemble& e) {
  double s = 0.0;
  for (double x : e.p) s += x;
  return s;
}

struct PeakonRates {
  std::vector<double> dp;
  std::vector<double> dq;
};

/// Canonical equations with sgn(0) = 0.
inline PeakonRates peakon_flow(const PeakonEnsemble& e) {
  const std::size_t n = e.size();
  PeakonRates r{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t j = 0; j < n; ++j) {
    double qdot = 0.0, force = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = e.q[j] - e.q[i];
      const double w = std::exp(-std::abs(d));
      qdot += e.p[i] * w;
      if (i != j) force += e.p[i] * static_cast<double>((d > 0.0) - (d < 0.0)) * w;
    }
    r.dq[j] = qdot;
    r.dp[j] = e.p[j] * force;
  }
  return r;
}

inline double min_separation(const PeakonEnsemble& e) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < e.size(); ++i)
    for (std::size_t j = i + 1; j < e.size(); ++j) m = std::min(m, std::abs(e.q[i] - e.q[j]));
  return m;
}

struct PeakonSnapshot {
  double t = 0.0;
  PeakonEnsemble state;
  double H = 0.0;
  double P = 0.0;
  bool near_collision = false;
};

struct PeakonTrajectory {
  std::vector<PeakonSnapshot> snapshots;
  std::size_t halvings = 0;  // total step halvings taken
};

namespace detail {
inline PeakonEnsemble axpy(const PeakonEnsemble& e, double h, const PeakonRates& r) {
  PeakonEnsemble out = e;
  for (std::size_t i = 0; i < e.size(); ++i) {
    out.p[i] += h * r.dp[i];
    out.q[i] += h * r.dq[i];
  }
  return out;
}

inline PeakonEnsemble rk4(const PeakonEnsemble& e, double h) {
  const PeakonRates k1 = peakon_flow(e);
  const PeakonRates k2 = peakon_flow(axpy(e, 0.5 * h, k1));
  const PeakonRates k3 = peakon_flow(axpy(e, 0.5 * h, k2));
  const PeakonRates k4 = peakon_flow(axpy(e, h, k3));
  PeakonEnsemble out = e;
  for (std::size_t i = 0; i < e.size(); ++i) {
    out.p[i] += h / 6.0 * (k1.dp[i] + 2.0 * k2.dp[i] + 2.0 * k3.dp[i] + k4.dp[i]);
    out.q[i] += h / 6.0 * (k1.dq[i] + 2.0 * k2.dq[i] + 2.0 * k3.dq[i] + k4.dq[i]);
  }
  return out;
}

// Largest relative change of any pairwise distance between a and b.
inline double max_distance_change(const PeakonEnsemble& a, const PeakonEnsemble& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const double d0 = std::abs(a.q[i] - a.q[j]);
      const double d1 = std::abs(b.q[i] - b.q[j]);
      worst = std::max(worst, std::abs(d1 - d0) / std::max(d0, 1e-300));
    }
  return worst;
}
}  // namespace detail

/// RK4 with nominal step dt. A step is split in halves while any pairwise
/// distance would change by more than 10%, at most 20 times. Snapshots are
/// taken every `stride` nominal steps and at t_end.
inline PeakonTrajectory evolve_peakons(const PeakonEnsemble& e0, double dt, double t_end, std::size_t stride = 1,
                                       double collision_tol = 1e-8) {
  e0.validate();
  if (!(dt > 0.0) || !(t_end >= 0.0)) throw ConfigError("peakon evolution needs dt > 0 and t_end >= 0");
  if (stride == 0) throw ConfigError("snapshot stride must be positive");
  PeakonTrajectory traj;
  auto snap = [&](double t, const PeakonEnsemble& e) {
    traj.snapshots.push_back({t, e, hamiltonian(e), total_momentum(e), min_separation(e) < collision_tol});
  };
  PeakonEnsemble e = e0;
  double t = 0.0;
  snap(t, e);
  const auto n_steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  for (std::size_t i = 1; i <= n_steps; ++i) {
    const double h = i == n_steps ? t_end - t : dt;
    int level = 0;
    PeakonEnsemble trial = detail::rk4(e, h);
    while (level < 20 && detail::max_distance_change(e, trial) > 0.1) {
      ++level;
      trial = detail::rk4(e, h / std::ldexp(1.0, level));
    }
    if (level > 0) {
      traj.halvings += static_cast<std::size_t>(level);
      const std::size_t parts = std::size_t{1} << level;
      const double sub = h / static_cast<double>(parts);
      for (std::size_t k = 0; k < parts; ++k) e = detail::rk4(e, sub);
    } else {
      e = trial;
    }
    t = i == n_steps ? t_end : static_cast<double>(i) * dt;
    if (i % stride == 0 || i == n_steps) snap(t, e);
  }
  return traj;
}

/// t,q_1..q_N,p_1..p_N,H,P
inline void write_peakon_csv(std::ostream& os, const PeakonTrajectory& traj) {
  const std::size_t n = traj.snapshots.empty() ? 0 : traj.snapshots.front().state.size();
  os << 't';
  for (std::size_t i = 1; i <= n; ++i) os << ",q_" << i;
  for (std::size_t i = 1; i <= n; ++i) os << ",p_" << i;
  os << ",H,P\n";
  for (const auto& s : traj.snapshots) {
    os << detail::format_double(s.t);
    for (double x : s.state.q) os << ',' << detail::format_double(x);
    for (double x : s.state.p) os << ',' << detail::format_double(x);
    os << ',' << detail::format_double(s.H) << ',' << detail::format_double(s.P) << '\n';
  }
}

struct SampledEnsemble {
  PeriodicField field;
  double boundary_tail = 0.0;  // |u| at x = -L/2
  bool leak_warning = false;
};

/// Samples sum_j (p_j/2) e^{-|x-q_j|}(1+|x-q_j|) on the centered nodes of g.
inline SampledEnsemble ensemble_to_field(const PeakonEnsemble& e, const Grid& g, double tail_tol = 1e-8) {
  e.validate();
  auto u = [&e](double x) {
    double v = 0.0;
    for (std::size_t j = 0; j < e.size(); ++j) v += pseudo_peakon(x - e.q[j], e.p[j]);
    return v;
  };
  SampledEnsemble out{PeriodicField::sample_centered(g, u), 0.0, false};
  out.boundary_tail = std::abs(u(-0.5 * g.length()));
  out.leak_warning = out.boundary_tail > tail_tol;
  return out;
}

}  // namespace rzq
