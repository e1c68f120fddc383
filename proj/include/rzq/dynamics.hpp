#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rzq/operators.hpp"
#include "rzq/spectral.hpp"

namespace rzq {

/// Which algebraic presentation of the equation supplies u_t.
struct RhsForm {
  enum class Kind { m_form, nonlocal, burgers_equiv, mollified };
  Kind kind = Kind::nonlocal;
  double epsilon = 1.0;  // mollified only

  static RhsForm m_form() { return {Kind::m_form, 1.0}; }
  static RhsForm nonlocal() { return {Kind::nonlocal, 1.0}; }
  static RhsForm burgers_equiv() { return {Kind::burgers_equiv, 1.0}; }
  static RhsForm mollified(double eps) {
    MollifierSpec{eps}.validate();
    return {Kind::mollified, eps};
  }

  std::string name() const {
    switch (kind) {
      case Kind::m_form: return "m_form";
      case Kind::nonlocal: return "nonlocal";
      case Kind::burgers_equiv: return "burgers_equiv";
      case Kind::mollified: return "mollified";
    }
    return "?";
  }
};

namespace detail {
// -( a / (1+k^2) + b / (1+k^2)^2 ) in one pass over the spectra.
inline PeriodicField neg_inv_helmholtz_sum(const PeriodicField& a, const PeriodicField& b) {
  const Grid& g = a.grid();
  auto sa = a.spectrum();
  auto sb = b.spectrum();
  Spectrum out(sa.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double kt = g.wavenumber(static_cast<long>(k));
    const double w = 1.0 / (1.0 + kt * kt);
    out[k] = -(sa[k] * w + sb[k] * (w * w));
  }
  return PeriodicField::from_spectrum(g, std::move(out));
}
}  // namespace detail

/// u_t from m_t + v m_x + 2 v_x m = 0 with v = lambda^2 u, m = lambda^2 v:
/// u_t = -lambda^{-4} [ v m_x + 2 v_x m ].
inline PeriodicField rhs_m_form(const PeriodicField& u) {
  const PeriodicField v = lambda_pow(u, 2.0);
  const PeriodicField m = lambda_pow(v, 2.0);
  const PeriodicField bracket =
      PeriodicField::combine(1.0, product(v, derivative(m, 1)), 2.0, product(derivative(v, 1), m));
  return -lambda_pow(bracket, -4.0);
}

/// u_t = -lambda^{-2}[V V_x] - lambda^{-4}[V_x V_xx + 2 V V_x], V = lambda^2 u.
inline PeriodicField rhs_nonlocal(const PeriodicField& u) {
  const PeriodicField V = lambda_pow(u, 2.0);
  const PeriodicField Vx = derivative(V, 1);
  const PeriodicField Vxx = derivative(V, 2);
  const PeriodicField VVx = product(V, Vx);
  const PeriodicField rest = PeriodicField::combine(1.0, product(Vx, Vxx), 2.0, VVx);
  return detail::neg_inv_helmholtz_sum(VVx, rest);
}

/// Burgers-type presentation, with Lambda = 1 - d_x^2:
/// u_t = -u u_x - (1/2) Lambda^{-1} d_x (u_xx)^2 - Lambda^{-1} d_x (u_x)^2
///       - Lambda^{-2} d_x [ (Lambda u)^2 + (1/2) (Lambda u_x)^2 ].
inline PeriodicField rhs_burgers_equiv(const PeriodicField& u) {
  const PeriodicField ux = derivative(u, 1);
  const PeriodicField uxx = derivative(u, 2);
  const PeriodicField Lu = lambda_pow(u, 2.0);
  const PeriodicField Lux = lambda_pow(ux, 2.0);
  const PeriodicField once = PeriodicField::combine(0.5, product(uxx, uxx), 1.0, product(ux, ux));
  const PeriodicField twice = PeriodicField::combine(1.0, product(Lu, Lu), 0.5, product(Lux, Lux));
  return detail::neg_inv_helmholtz_sum(derivative(once, 1), derivative(twice, 1)) - product(u, ux);
}

/// Nonlocal form with the transport term smoothed:
/// u_t = -J lambda^{-2}[lambda^2 J u  lambda^2 d_x J u] - lambda^{-4}[V_x V_xx + 2 V V_x].
inline PeriodicField rhs_mollified(const PeriodicField& u, double epsilon) {
  const MollifierSpec spec{epsilon};
  spec.validate();
  const PeriodicField Ju = mollify(u, spec);
  const PeriodicField W = lambda_pow(Ju, 2.0);
  const PeriodicField transport = mollify(product(W, derivative(W, 1)), spec);
  const PeriodicField V = lambda_pow(u, 2.0);
  const PeriodicField Vx = derivative(V, 1);
  const PeriodicField rest =
      PeriodicField::combine(1.0, product(Vx, derivative(V, 2)), 2.0, product(V, Vx));
  return detail::neg_inv_helmholtz_sum(transport, rest);
}

inline PeriodicField evaluate_rhs(const PeriodicField& u, const RhsForm& form) {
  switch (form.kind) {
    case RhsForm::Kind::m_form: return rhs_m_form(u);
    case RhsForm::Kind::nonlocal: return rhs_nonlocal(u);
    case RhsForm::Kind::burgers_equiv: return rhs_burgers_equiv(u);
    case RhsForm::Kind::mollified: return rhs_mollified(u, form.epsilon);
  }
  return rhs_nonlocal(u);
}

/// True when modes |k| >= N/3 carry more than 1e-6 of the H^4 energy; the fourth
/// order operator then amplifies truncation error.
inline bool resolution_warning(const PeriodicField& u) { return top_third_energy_fraction(u, 4.0) > 1e-6; }

/// dt ceiling 0.5 / max(||lambda^2 u||_inf * k_max, 1): transport at speed V is the
/// stiffest unsmoothed term.
inline double stability_ceiling(const PeriodicField& u) {
  const double speed = sup_norm(lambda_pow(u, 2.0));
  return 0.5 / std::max(speed * u.grid().max_wavenumber(), 1.0);
}

namespace detail {
inline bool all_finite(const PeriodicField& u) {
  for (const auto& c : u.spectrum())
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  return true;
}
}  // namespace detail

/// One classical fourth-order Runge-Kutta step. `t` only labels a blow-up.
inline PeriodicField step(const PeriodicField& u, double dt, const RhsForm& form, double t = 0.0) {
  const PeriodicField k1 = evaluate_rhs(u, form);
  const PeriodicField k2 = evaluate_rhs(PeriodicField::combine(1.0, u, 0.5 * dt, k1), form);
  const PeriodicField k3 = evaluate_rhs(PeriodicField::combine(1.0, u, 0.5 * dt, k2), form);
  const PeriodicField k4 = evaluate_rhs(PeriodicField::combine(1.0, u, dt, k3), form);
  const Grid& g = u.grid();
  auto su = u.spectrum();
  auto s1 = k1.spectrum();
  auto s2 = k2.spectrum();
  auto s3 = k3.spectrum();
  auto s4 = k4.spectrum();
  Spectrum out(su.size());
  const double c = dt / 6.0;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = su[k] + c * (s1[k] + 2.0 * s2[k] + 2.0 * s3[k] + s4[k]);
  PeriodicField next = PeriodicField::from_spectrum(g, std::move(out));
  if (!detail::all_finite(next)) {
    std::ostringstream os;
    os << "non-finite state after step from t = " << t;
    throw BlowUpError(os.str(), t + dt);
  }
  return next;
}

struct EvolutionConfig {
  Grid grid{256};
  double dt = 1e-3;
  double t_end = 1.0;
  RhsForm rhs = RhsForm::nonlocal();
  std::size_t snapshot_stride = 1;
  double norm_index = 4.0;  // s of the H^s diagnostic
  bool keep_states = true;
  double blowup_factor = 1e6;  // blow-up signal once ||u||_{H^s} passes this multiple of the initial norm
};

struct BlowUpInfo {
  double time = 0.0;
  std::string reason;
};

/// Conserved along smooth flows: the mean, and the integral of sqrt(m) while m > 0.
struct ConservedQuantities {
  double mean = 0.0;
  std::optional<double> sqrt_m_integral;
};

inline ConservedQuantities conserved_quantities(const PeriodicField& u) {
  ConservedQuantities q;
  q.mean = u.mean();
  const PeriodicField m = lambda_pow(u, 4.0);
  double sum = 0.0;
  for (double x : m.values()) {
    if (!(x > 0.0)) return q;
    sum += std::sqrt(x);
  }
  q.sqrt_m_integral = sum * u.grid().spacing();
  return q;
}

struct Trajectory {
  std::vector<double> times;
  std::vector<PeriodicField> states;  // empty unless keep_states
  std::vector<double> hs_norm;
  std::vector<double> mean;
  std::vector<std::optional<double>> sqrt_m;
  std::optional<BlowUpInfo> blowup;
  bool resolution_warning = false;

  /// Last recorded state (the final one, or the last valid one before blow-up).
  const PeriodicField& final_state() const { return states.back(); }
};

/// Checks the configuration against the initial datum; throws ConfigError or
/// StabilityError (the latter names dt).
inline void validate(const EvolutionConfig& cfg, const PeriodicField& u0) {
  if (!(u0.grid() == cfg.grid)) throw ConfigError("initial datum is not on the configured grid");
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw ConfigError("dt must be positive");
  if (!(cfg.t_end >= cfg.dt)) throw ConfigError("t_end must be at least dt");
  if (cfg.snapshot_stride == 0) throw ConfigError("snapshot_stride must be positive");
  if (!(cfg.blowup_factor > 1.0)) throw ConfigError("blowup_factor must exceed 1");
  const double ceiling = stability_ceiling(u0);
  if (cfg.dt > ceiling) {
    std::ostringstream os;
    os << "dt = " << cfg.dt << " exceeds the stability ceiling " << ceiling;
    throw StabilityError(os.str(), cfg.dt, ceiling);
  }
}

/// Time-steps u0 and calls on_step(step_index, t, u) after every step (and once
/// with index 0 at t = 0). Stops when on_step returns false. Returns the blow-up
/// signal if the state became non-finite or its H^s norm passed blowup_factor
/// times the initial value. Throws StabilityError if dt exceeds the ceiling (checked every
/// 10 steps).
template <class OnStep>
std::optional<BlowUpInfo> integrate(const PeriodicField& u0, const EvolutionConfig& cfg, OnStep&& on_step) {
  validate(cfg, u0);
  const double norm0 = sobolev_norm(u0, cfg.norm_index);
  const double limit = cfg.blowup_factor * std::max(norm0, std::numeric_limits<double>::min());
  PeriodicField u = u0;
  double t = 0.0;
  if (!on_step(std::size_t{0}, t, u)) return std::nullopt;
  const auto n_steps = static_cast<std::size_t>(std::ceil(cfg.t_end / cfg.dt - 1e-9));
  for (std::size_t i = 1; i <= n_steps; ++i) {
    if (i % 10 == 0) {
      const double ceiling = stability_ceiling(u);
      if (cfg.dt > ceiling) {
        std::ostringstream os;
        os << "dt = " << cfg.dt << " exceeds the stability ceiling " << ceiling << " at t = " << t;
        throw StabilityError(os.str(), cfg.dt, ceiling);
      }
    }
    const double h = i == n_steps ? cfg.t_end - t : cfg.dt;
    try {
      u = step(u, h, cfg.rhs, t);
    } catch (const BlowUpError& e) {
      return BlowUpInfo{e.time(), e.what()};
    }
    t = i == n_steps ? cfg.t_end : static_cast<double>(i) * cfg.dt;
    if (sobolev_norm(u, cfg.norm_index) > limit) {
      std::ostringstream os;
      os << "H^" << cfg.norm_index << " norm exceeded " << cfg.blowup_factor << " times its initial value";
      return BlowUpInfo{t, os.str()};
    }
    if (!on_step(i, t, u)) return std::nullopt;
  }
  return std::nullopt;
}

inline Trajectory evolve(const PeriodicField& u0, const EvolutionConfig& cfg) {
  Trajectory traj;
  const auto n_steps = static_cast<std::size_t>(std::ceil(cfg.t_end / cfg.dt - 1e-9));
  auto record = [&](double t, const PeriodicField& u) {
    traj.times.push_back(t);
    if (cfg.keep_states || traj.states.empty()) traj.states.push_back(u);
    else traj.states.back() = u;
    traj.hs_norm.push_back(sobolev_norm(u, cfg.norm_index));
    const auto q = conserved_quantities(u);
    traj.mean.push_back(q.mean);
    traj.sqrt_m.push_back(q.sqrt_m_integral);
    traj.resolution_warning = traj.resolution_warning || resolution_warning(u);
  };
  PeriodicField last = u0;
  double last_t = 0.0;
  traj.blowup = integrate(u0, cfg, [&](std::size_t i, double t, const PeriodicField& u) {
    last = u;
    last_t = t;
    if (i % cfg.snapshot_stride == 0 || i == n_steps) record(t, u);
    return true;
  });
  if (traj.blowup && traj.times.back() != last_t) record(last_t, last);
  return traj;
}

/// t, H^s norm, mean, integral of sqrt(m) ("undefined" where m changes sign).
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj, double norm_index) {
  os << "t,hs_norm_" << detail::format_double(norm_index) << ",mean,sqrt_m_integral\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    os << detail::format_double(traj.times[i]) << ',' << detail::format_double(traj.hs_norm[i]) << ','
       << detail::format_double(traj.mean[i]) << ','
       << (traj.sqrt_m[i] ? detail::format_double(*traj.sqrt_m[i]) : std::string("undefined")) << '\n';
  }
}

struct Lifespan {
  double time = 0.0;
  bool reached_end = false;     // the norm never doubled before t_end
  bool blowup = false;          // blow-up signal raised during the run
  bool failed_at_start = false; // blow-up before the first step completed
};

/// Largest simulated t with ||u(tau)||_{H^s} <= 2 ||u0||_{H^s} for all tau <= t.
inline Lifespan empirical_lifespan(const PeriodicField& u0, double s, EvolutionConfig cfg) {
  cfg.keep_states = false;
  Lifespan out;
  const double bound = 2.0 * sobolev_norm(u0, s);
  bool exceeded = false;
  const auto blow = integrate(u0, cfg, [&](std::size_t, double t, const PeriodicField& u) {
    if (sobolev_norm(u, s) > bound) {
      exceeded = true;
      return false;
    }
    out.time = t;
    return true;
  });
  if (blow) {
    out.blowup = true;
    out.failed_at_start = out.time == 0.0;
  }
  out.reached_end = !exceeded && !blow;
  return out;
}

struct LifespanScaling {
  double alpha = 1.0;
  double lifespan = 0.0;
  double scaled = 0.0;  // alpha * lifespan, constant under the 1/||u0|| law
};

inline std::vector<LifespanScaling> lifespan_scaling(const PeriodicField& u0, double s, const EvolutionConfig& cfg,
                                                     const std::vector<double>& alphas) {
  std::vector<LifespanScaling> out;
  for (double a : alphas) {
    const Lifespan l = empirical_lifespan(a * u0, s, cfg);
    out.push_back({a, l.time, a * l.time});
  }
  return out;
}

}  // namespace rzq
