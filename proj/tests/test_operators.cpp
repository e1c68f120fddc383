// Mollifier and the commutator / product inequality checks.

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <rzq/rzq.hpp>

using namespace rzq;
using Catch::Approx;

namespace {

double max_abs_diff(const PeriodicField& a, const PeriodicField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

}  // namespace

TEST_CASE("mollifier symbol shape", "[mollifier]") {
  REQUIRE(default_mollifier_symbol(0.0) == 1.0);
  REQUIRE(default_mollifier_symbol(1.0) == 1.0);
  REQUIRE(default_mollifier_symbol(-1.0) == 1.0);
  REQUIRE(default_mollifier_symbol(2.0) == 0.0);
  REQUIRE(default_mollifier_symbol(-3.0) == 0.0);
  double prev = 1.0;
  for (double x = 1.0; x <= 2.0; x += 0.01) {
    const double v = default_mollifier_symbol(x);
    REQUIRE(v >= 0.0);
    REQUIRE(v <= prev);
    prev = v;
  }
  REQUIRE(default_mollifier_symbol(1.5) == Approx(0.5).margin(1e-15));
}

TEST_CASE("smooth step derivative matches finite differences", "[mollifier]") {
  for (double t : {0.1, 0.3, 0.5, 0.77, 0.95}) {
    const double h = 1e-6;
    // smooth_step(1 - t) = 1 - smooth_step(t): difference where the step is
    // small, away from the cancellation next to 1.
    const double m = std::min(t, 1.0 - t);
    const double fd = (smooth_step(m + h) - smooth_step(m - h)) / (2 * h);
    REQUIRE(smooth_step(1.0 - t) == Approx(1.0 - smooth_step(t)).margin(1e-15));
    REQUIRE(smooth_step_derivative(t) == Approx(fd).epsilon(1e-7));
  }
  for (double x : {-3.5, -2.4, 2.1, 3.9}) {
    const double h = 1e-6;
    const double fd = (plateau_bump(x + h, 2, 4) - plateau_bump(x - h, 2, 4)) / (2 * h);
    // Next to the plateau the bump is close to 1 and the quotient loses about
    // 1e-16 / h to cancellation.
    REQUIRE(plateau_bump_derivative(x, 2, 4) == Approx(fd).epsilon(1e-6).margin(1e-9));
  }
}

TEST_CASE("mollifier leaves low modes alone and removes high ones", "[mollifier]") {
  Grid g(64);
  auto c1 = PeriodicField::sample(g, [](double x) { return std::cos(x); });
  auto c8 = PeriodicField::sample(g, [](double x) { return std::cos(8 * x); });
  // Symbol exactly 1 there; only the transform round trip remains.
  REQUIRE(max_abs_diff(mollify(c1, 0.5), c1) <= 1e-15);
  REQUIRE(sup_norm(mollify(c8, 1.0)) <= 1e-15);
  REQUIRE_THROWS_AS(mollify(c1, 0.0), DomainError);
  REQUIRE_THROWS_AS(mollify(c1, 1.5), DomainError);
}

TEST_CASE("mollifier is idempotent on modes with |eps k| <= 1", "[mollifier][property]") {
  Grid g(128);
  for (double eps : {1.0, 0.5, 0.25, 0.125}) {
    auto f = random_field(g, 1.0, 11, 60);
    auto once = mollify(f, eps);
    auto twice = mollify(once, eps);
    for (long k = 0; static_cast<double>(k) * eps <= 1.0 && k <= 64; ++k) {
      REQUIRE(once.coefficient(k) == f.coefficient(k));
      REQUIRE(twice.coefficient(k) == once.coefficient(k));
    }
  }
}

TEST_CASE("mollifier contracts every H^s norm on the corpus", "[mollifier][property]") {
  Grid g(128);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto f = random_field(g, 1.0 + static_cast<double>(seed % 4), mix_seed(3, seed), 42);
    for (double eps : {1.0, 0.5, 0.25, 0.125})
      for (double s : {0.0, 2.0, 4.0}) REQUIRE(sobolev_norm(mollify(f, eps), s) <= sobolev_norm(f, s));
  }
}

TEST_CASE("mollifier defect rate", "[mollifier]") {
  const std::vector<double> eps{0.5, 0.25, 0.125, 0.0625, 0.03125};

  SECTION("band-limited field: defect vanishes, reported as exact") {
    Grid g(64);
    auto f = random_field(g, 1.0, 2, 2);
    auto r = mollifier_defect_rate(f, 4.0, 2.0, eps);
    REQUIRE(r.exact());
    for (auto [e, d] : r.samples) REQUIRE(d == 0.0);
  }

  SECTION("borderline H^4 field, r = 2: slope >= 1.8") {
    Grid g(4096);
    const double s = 4.0, r = 2.0;
    Spectrum c(g.spectrum_size());
    for (std::size_t k = 1; k + 1 < c.size(); ++k) {
      const double kt = static_cast<double>(k);
      c[k] = std::pow(1.0 + kt * kt, -(s + 0.5 + 0.01) / 2.0);
    }
    auto f = from_spectrum(c, g);
    // Brute-force defect from the coefficients, without going through mollify().
    auto brute = [&](double e) {
      double sum = 0.0;
      for (std::size_t k = 1; k + 1 < c.size(); ++k) {
        const double kt = static_cast<double>(k);
        const double m = 1.0 - plateau_bump(e * kt, 1.0, 2.0);
        sum += 2.0 * std::pow(1.0 + kt * kt, r) * std::norm(c[k]) * m * m;
      }
      return std::sqrt(sum);
    };
    auto rate = mollifier_defect_rate(f, s, r, eps);
    REQUIRE_FALSE(rate.exact());
    for (auto [e, d] : rate.samples) REQUIRE(d == Approx(brute(e)).epsilon(1e-10));
    REQUIRE(rate.fit->slope >= s - r - 0.2);
  }

  SECTION("s = r: defect only tends to zero") {
    Grid g(1024);
    auto f = power_law_field(g, 2.0 + 0.51);
    auto rate = mollifier_defect_rate(f, 2.0, 2.0, eps);
    for (std::size_t i = 1; i < rate.samples.size(); ++i) REQUIRE(rate.samples[i].second < rate.samples[i - 1].second);
  }

  SECTION("errors") {
    Grid g(64);
    REQUIRE_THROWS_AS(mollifier_defect_rate(PeriodicField::zeros(g), 4, 2, eps), DegenerateInputError);
    REQUIRE_THROWS_AS(mollifier_defect_rate(random_field(g, 1, 1, 10), 2, 3, eps), DomainError);
  }
}

TEST_CASE("Kato-Ponce commutator check", "[inequalities]") {
  Grid g(128);
  auto f = random_field(g, 4.0, 1, 42);
  auto h = random_field(g, 4.0, 2, 42);
  auto k = kato_ponce_check(PeriodicField::constant(g, 2.5), h, 4.0);
  // The commutator vanishes for constant f; what is left is round-off weighted
  // by (1 + k^2)^2 at the top of the grid (|k| = 64).
  const double floor = 1e-15 * std::pow(1.0 + 64.0 * 64.0, 2.0);
  REQUIRE(k.lhs < floor * l2_norm(h));
  REQUIRE(k.ratio < floor);
  auto z = kato_ponce_check(f, PeriodicField::zeros(g), 4.0);
  REQUIRE(z.lhs == 0.0);
  REQUIRE(z.ratio == 0.0);
  auto r = kato_ponce_check(f, h, 4.0);
  REQUIRE(std::isfinite(r.ratio));
  REQUIRE(r.rhs_components.size() == 2);
  REQUIRE(r.ratio == Approx(r.lhs / (r.rhs_components[0].second + r.rhs_components[1].second)));
}

TEST_CASE("product lemma check", "[inequalities]") {
  Grid g(128);
  auto h = random_field(g, 4.0, 9, 42);
  auto one = product_lemma_check(PeriodicField::constant(g, 1.0), h, 2.0);
  REQUIRE(one.ratio <= 1.0 + 1e-10);
  auto c = PeriodicField::sample(g, [](double x) { return std::cos(x); });
  auto cc = product_lemma_check(c, c, 1.0);
  // ||cos^2||_{L2} = sqrt(1/4 + 2/16) = sqrt(3/8); ||cos||_{H1} = 1; ||cos||_{L2} = 1/sqrt2.
  REQUIRE(cc.ratio == Approx(std::sqrt(3.0 / 8.0) * std::sqrt(2.0)).epsilon(1e-12));
  auto f = random_field(g, 4.0, 10, 42);
  const double ab = product_lemma_check(f, h, 2.0).ratio;
  const double ba = product_lemma_check(h, f, 2.0).ratio;
  REQUIRE(ab != ba);
  REQUIRE_THROWS_AS(product_lemma_check(PeriodicField::zeros(g), h, 2.0), DegenerateInputError);
}

TEST_CASE("commutator check", "[inequalities]") {
  Grid g(128);
  auto v = random_field(g, 4.0, 4, 42);
  auto f = random_field(g, 4.0, 5, 42);
  REQUIRE(ccm_commutator_check(PeriodicField::constant(g, 1.7), v, 0.75, 2.0).lhs < 1e-12);
  REQUIRE(ccm_commutator_check(f, PeriodicField::zeros(g), 0.75, 2.0).lhs == 0.0);
  REQUIRE_THROWS_AS(ccm_commutator_check(f, v, 0.75, 1.0), DomainError);
  REQUIRE_THROWS_AS(ccm_commutator_check(f, v, 1.5, 2.0), DomainError);
}

TEST_CASE("lemma sweeps: finite ratios, constants stable under refinement", "[inequalities][property]") {
  for (Lemma lemma : {Lemma::kato_ponce, Lemma::product, Lemma::ccm}) {
    LemmaSweep sw;
    sw.lemma = lemma;
    sw.samples = 500;
    sw.s = lemma == Lemma::kato_ponce ? 4.0 : 2.0;
    sw.grid_n = 128;
    auto a = run_lemma_sweep(sw, 2);
    sw.grid_n = 256;
    auto b = run_lemma_sweep(sw, 2);
    for (const auto& r : a.records) REQUIRE(std::isfinite(r.ratio));
    for (const auto& r : b.records) REQUIRE(std::isfinite(r.ratio));
    REQUIRE(b.max_ratio == Approx(a.max_ratio).epsilon(0.1));
  }
}

TEST_CASE("lemma sweep is deterministic and independent of the worker count", "[inequalities]") {
  LemmaSweep sw;
  sw.samples = 50;
  sw.seed = 7;
  auto a = run_lemma_sweep(sw, 1);
  auto b = run_lemma_sweep(sw, 3);
  std::ostringstream oa, ob;
  write_inequality_csv(oa, a.records);
  write_inequality_csv(ob, b.records);
  REQUIRE(oa.str() == ob.str());
}
