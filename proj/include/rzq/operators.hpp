#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "rzq/bump.hpp"
#include "rzq/fit.hpp"
#include "rzq/parallel.hpp"
#include "rzq/random_field.hpp"
#include "rzq/spectral.hpp"

namespace rzq {

/// Default Friedrichs symbol: 1 on [-1, 1], 0 outside (-2, 2), C-infinity in between.
inline double default_mollifier_symbol(double xi) { return plateau_bump(xi, 1.0, 2.0); }

/// J_eps acts as the Fourier multiplier symbol(eps * k).
struct MollifierSpec {
  double epsilon = 1.0;
  std::function<double(double)> symbol = default_mollifier_symbol;

  void validate() const {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) {
      throw DomainError("mollifier epsilon must lie in (0, 1], got " + std::to_string(epsilon));
    }
  }
};

inline PeriodicField mollify(const PeriodicField& f, const MollifierSpec& spec) {
  spec.validate();
  return apply_multiplier(f, [&spec](double k) { return spec.symbol(spec.epsilon * k); });
}

inline PeriodicField mollify(const PeriodicField& f, double epsilon) {
  return mollify(f, MollifierSpec{epsilon});
}

struct DefectRate {
  /// Empty when (I - J_eps) f vanished for every epsilon: f is band-limited below 1/eps_max.
  std::optional<LinearFit> fit;
  std::vector<std::pair<double, double>> samples;  // (epsilon, ||(I - J_eps) f||_{H^r})
  bool exact() const { return !fit.has_value(); }
};

/// Fits log ||(I - J_eps) f||_{H^r} against log eps.
inline DefectRate mollifier_defect_rate(const PeriodicField& f, double s, double r,
                                        const std::vector<double>& eps_list) {
  if (!(r > 0.0 && r <= s)) throw DomainError("defect rate needs 0 < r <= s");
  if (sobolev_norm(f, 0.0) == 0.0) throw DegenerateInputError("defect rate of the zero field");
  DefectRate out;
  std::vector<double> xs, ys;
  for (double eps : eps_list) {
    const double d = sobolev_norm(f - mollify(f, eps), r);
    out.samples.emplace_back(eps, d);
    if (d > 0.0) {
      xs.push_back(eps);
      ys.push_back(d);
    }
  }
  if (xs.empty()) return out;
  if (xs.size() < 2) throw DegenerateInputError("defect vanishes at all but one epsilon; no slope");
  out.fit = fit_loglog(xs, ys);
  return out;
}

/// One evaluation of an inequality lhs <= C * rhs; `ratio` is the empirical C.
struct InequalityRecord {
  double lhs = 0.0;
  std::vector<std::pair<std::string, double>> rhs_components;
  double ratio = 0.0;
};

namespace detail {
inline double safe_ratio(double lhs, double den) {
  if (den > 0.0) return lhs / den;
  if (lhs == 0.0) return 0.0;
  throw DegenerateInputError("inequality has zero right-hand side but nonzero left-hand side");
}
}  // namespace detail

/// ||lambda^s(fg) - f lambda^s g||_{L2} against
/// ||lambda^s f||_{L2} ||g||_{Linf} + ||f_x||_{Linf} ||lambda^{s-1} g||_{L2}.
inline InequalityRecord kato_ponce_check(const PeriodicField& f, const PeriodicField& g, double s) {
  if (!(s > 0.0)) throw DomainError("Kato-Ponce commutator needs s > 0");
  const PeriodicField comm = lambda_pow(product(f, g), s) - product(f, lambda_pow(g, s));
  InequalityRecord rec;
  rec.lhs = l2_norm(comm);
  const double a = l2_norm(lambda_pow(f, s)) * sup_norm(g);
  const double b = sup_norm(derivative(f, 1)) * l2_norm(lambda_pow(g, s - 1.0));
  rec.rhs_components = {{"lambda_s_f_times_g_inf", a}, {"f_x_inf_times_lambda_s1_g", b}};
  rec.ratio = detail::safe_ratio(rec.lhs, a + b);
  return rec;
}

/// ||fg||_{H^{r-1}} against ||f||_{H^r} ||g||_{H^{r-1}}.
inline InequalityRecord product_lemma_check(const PeriodicField& f, const PeriodicField& g, double r) {
  if (!(r > 0.5)) throw DomainError("product estimate needs r > 1/2");
  InequalityRecord rec;
  rec.lhs = sobolev_norm(product(f, g), r - 1.0);
  const double nf = sobolev_norm(f, r);
  const double ng = sobolev_norm(g, r - 1.0);
  rec.rhs_components = {{"f_Hr", nf}, {"g_Hr1", ng}};
  if (nf * ng == 0.0) throw DegenerateInputError("product estimate with a zero factor");
  rec.ratio = rec.lhs / (nf * ng);
  return rec;
}

/// ||lambda^rho d_x(f v) - f lambda^rho d_x v||_{L2} against ||f||_{H^r} ||v||_{H^rho}.
inline InequalityRecord ccm_commutator_check(const PeriodicField& f, const PeriodicField& v, double rho,
                                             double r) {
  if (!(r > 1.5)) throw DomainError("commutator estimate needs r > 3/2");
  if (!(rho + 1.0 >= 0.0 && rho + 1.0 <= r)) throw DomainError("commutator estimate needs 0 <= rho + 1 <= r");
  const PeriodicField comm =
      lambda_pow(derivative(product(f, v), 1), rho) - product(f, lambda_pow(derivative(v, 1), rho));
  InequalityRecord rec;
  rec.lhs = l2_norm(comm);
  const double nf = sobolev_norm(f, r);
  const double nv = sobolev_norm(v, rho);
  rec.rhs_components = {{"f_Hr", nf}, {"v_Hrho", nv}};
  rec.ratio = detail::safe_ratio(rec.lhs, nf * nv);
  return rec;
}

/// sample_id,lhs,rhs_1,rhs_2,ratio
inline void write_inequality_csv(std::ostream& os, const std::vector<InequalityRecord>& batch) {
  os << "sample_id,lhs,rhs_1,rhs_2,ratio\n";
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& r = batch[i];
    const double r1 = r.rhs_components.size() > 0 ? r.rhs_components[0].second : 0.0;
    const double r2 = r.rhs_components.size() > 1 ? r.rhs_components[1].second : 0.0;
    os << i << ',' << detail::format_double(r.lhs) << ',' << detail::format_double(r1) << ','
       << detail::format_double(r2) << ',' << detail::format_double(r.ratio) << '\n';
  }
}

enum class Lemma { kato_ponce, product, ccm };

inline std::string lemma_name(Lemma l) {
  switch (l) {
    case Lemma::kato_ponce: return "kato_ponce";
    case Lemma::product: return "product";
    case Lemma::ccm: return "ccm";
  }
  return "?";
}

/// Parameters of one corpus sweep. Corpus fields decay like (1+k^2)^{-(reg+1)/2}
/// and are band-limited to N/3 so every product is alias free.
struct LemmaSweep {
  Lemma lemma = Lemma::kato_ponce;
  std::size_t grid_n = 128;
  std::size_t samples = 500;
  std::uint64_t seed = 1;
  double s = 4.0;      // Kato-Ponce s, product r, commutator r
  double rho = 0.75;   // commutator only
  double regularity = 4.0;
  std::size_t band_limit = 0;  // 0 = N/3
};

struct LemmaSweepResult {
  std::vector<InequalityRecord> records;
  double max_ratio = 0.0;
};

inline LemmaSweepResult run_lemma_sweep(const LemmaSweep& sw, unsigned workers = 1) {
  const Grid grid(sw.grid_n);
  const std::size_t band = sw.band_limit == 0 ? sw.grid_n / 3 : sw.band_limit;
  auto records = parallel_map(sw.samples, workers, [&](std::size_t i) {
    const PeriodicField f = random_field(grid, sw.regularity, mix_seed(sw.seed, 2 * i), band);
    const PeriodicField g = random_field(grid, sw.regularity, mix_seed(sw.seed, 2 * i + 1), band);
    switch (sw.lemma) {
      case Lemma::kato_ponce: return kato_ponce_check(f, g, sw.s);
      case Lemma::product: return product_lemma_check(f, g, sw.s);
      case Lemma::ccm: return ccm_commutator_check(f, g, sw.rho, sw.s);
    }
    return InequalityRecord{};
  });
  LemmaSweepResult out;
  for (const auto& r : records) out.max_ratio = std::max(out.max_ratio, r.ratio);
  out.records = std::move(records);
  return out;
}

}  // namespace rzq
