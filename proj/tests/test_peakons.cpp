// Pseudo-peakon profile, its transform and H^s scan, the N-peakon ODE.

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include <rzq/rzq.hpp>

using namespace rzq;
using Catch::Approx;

namespace {

constexpr double pi = std::numbers::pi;

PeakonEnsemble two_peakons() { return {{2.0, 1.0}, {-5.0, 0.0}}; }

}  // namespace

TEST_CASE("pseudo-peakon profile", "[peakon]") {
  REQUIRE(pseudo_peakon(0.0, 1.0) == 0.5);
  REQUIRE(pseudo_peakon(3.0, 1.0, 3.0) == 0.5);
  for (double x : {-3.0, 0.0, 1.7}) REQUIRE(pseudo_peakon(x, 0.0) == 0.0);
  REQUIRE(pseudo_peakon(-2.0, 1.5) == pseudo_peakon(2.0, 1.5));
}

TEST_CASE("third derivative jumps at the crest", "[peakon]") {
  // d^3/dxi^3 of (1/2) e^{-xi}(1+xi) at 0+ is 1; by symmetry the jump is 2.
  const double h = 1e-3;
  auto f = [](double x) { return pseudo_peakon(x, 1.0); };
  // One-sided third differences from 0 outward.
  const double right = (f(3 * h) - 3 * f(2 * h) + 3 * f(h) - f(0)) / (h * h * h);
  const double left = (f(0) - 3 * f(-h) + 3 * f(-2 * h) - f(-3 * h)) / (h * h * h);
  REQUIRE(right - left == Approx(2.0).epsilon(0.01));
}

TEST_CASE("Fourier transform: closed form and quadrature", "[peakon][transform]") {
  REQUIRE(pseudo_peakon_fourier(0.0) == 2.0);
  REQUIRE(pseudo_peakon_fourier(1.0) == 0.5);
  for (double xi : {0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0})
    REQUIRE(std::abs(pseudo_peakon_fourier_quadrature(xi) - pseudo_peakon_fourier(xi)) <= 1e-8);
  for (int i = 0; i <= 40; ++i) {
    const double xi = -20.0 + i;
    REQUIRE(std::abs(pseudo_peakon_fourier_quadrature(xi, 1.3) - pseudo_peakon_fourier(xi, 1.3)) <= 1e-8);
  }
}

TEST_CASE("peakon Sobolev integral", "[peakon][sobolev]") {
  for (double R : {1.0, 10.0, 1e3}) REQUIRE(peakon_sobolev_norm_sq(4.0, R) == 8.0 * R);
  // s = 3: 8 arctan R.
  for (double R : {1.0, 5.0, 100.0, 1e6}) REQUIRE(peakon_sobolev_norm_sq(3.0, R) == Approx(8.0 * std::atan(R)).epsilon(1e-10));
  REQUIRE(peakon_sobolev_norm_sq(3.0, 1e8) == Approx(4.0 * pi).epsilon(1e-7));
  // s = 3.5: 8 asinh R, so the difference between 1e4 and 1e2 is close to 8 ln 100.
  REQUIRE(peakon_sobolev_norm_sq(3.5, 1e3) == Approx(8.0 * std::asinh(1e3)).epsilon(1e-10));
  const double diff = peakon_sobolev_norm_sq(3.5, 1e4) - peakon_sobolev_norm_sq(3.5, 1e2);
  REQUIRE(diff / (8.0 * std::log(100.0)) == Approx(1.0).epsilon(0.05));
  REQUIRE_THROWS_AS(peakon_sobolev_norm_sq(3.0, 0.0), DomainError);
}

TEST_CASE("peakon Sobolev integral is increasing in R", "[peakon][sobolev][property]") {
  for (double s : {3.0, 3.4, 3.5, 3.6, 4.0}) {
    double prev = 0.0;
    for (double R = 0.5; R < 1e7; R *= 3.0) {
      const double v = peakon_sobolev_norm_sq(s, R);
      REQUIRE(v > prev);
      prev = v;
    }
  }
}

TEST_CASE("bounded / unbounded classification around s = 7/2", "[peakon][sobolev]") {
  auto b3 = classify_norm_growth(3.0);
  REQUIRE(b3.verdict == NormGrowth::bounded);
  auto b34 = classify_norm_growth(3.4);
  REQUIRE(b34.verdict == NormGrowth::bounded);
  REQUIRE(b34.increments.back() < 1e-3);
  auto u36 = classify_norm_growth(3.6);
  REQUIRE(u36.verdict == NormGrowth::unbounded);
  for (double inc : u36.increments) REQUIRE(inc >= u36.increments.front());
  REQUIRE(classify_norm_growth(4.0).verdict == NormGrowth::unbounded);
  // s = 3.5: each doubling adds 8 ln 2 asymptotically, never shrinking to zero.
  auto l = classify_norm_growth(3.5);
  REQUIRE(l.verdict == NormGrowth::unbounded);
  REQUIRE(l.increments.back() == Approx(8.0 * std::log(2.0)).epsilon(1e-6));
}

TEST_CASE("Hamiltonian", "[peakon][ode]") {
  REQUIRE(hamiltonian({{2.0}, {0.0}}) == 2.0);
  REQUIRE(hamiltonian({{1.0, 1.0}, {0.0, std::log(2.0)}}) == Approx(1.5).epsilon(1e-15));
  PeakonEnsemble e{{0.3, -1.2, 2.0}, {-1.0, 0.4, 2.5}};
  PeakonEnsemble f = e;
  for (auto& p : f.p) p *= 3.0;
  REQUIRE(hamiltonian(f) == Approx(9.0 * hamiltonian(e)).epsilon(1e-14));
}

TEST_CASE("canonical flow", "[peakon][ode]") {
  auto one = peakon_flow({{1.7}, {0.3}});
  REQUIRE(one.dq[0] == 1.7);
  REQUIRE(one.dp[0] == 0.0);
  for (double a : {0.1, 1.0, 3.0}) {
    auto r = peakon_flow({{1.0, -1.0}, {-a, a}});
    REQUIRE(std::abs(r.dp[0] + r.dp[1]) < 1e-15);
  }
}

TEST_CASE("flow is the finite-difference gradient of H", "[peakon][ode][property]") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pd(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 4);
    PeakonEnsemble e;
    for (std::size_t i = 0; i < n; ++i) {
      e.p.push_back(pd(rng));
      e.q.push_back(3.0 * static_cast<double>(i) + 0.5 * pd(rng));  // separations >= 1
    }
    auto r = peakon_flow(e);
    const double h = 1e-6;
    for (std::size_t i = 0; i < n; ++i) {
      auto plus = e, minus = e;
      plus.p[i] += h;
      minus.p[i] -= h;
      const double dHdp = (hamiltonian(plus) - hamiltonian(minus)) / (2 * h);
      plus = e;
      minus = e;
      plus.q[i] += h;
      minus.q[i] -= h;
      const double dHdq = (hamiltonian(plus) - hamiltonian(minus)) / (2 * h);
      REQUIRE(std::abs(r.dq[i] - dHdp) <= 1e-6 * std::max(1.0, std::abs(dHdp)));
      REQUIRE(std::abs(r.dp[i] + dHdq) <= 1e-6 * std::max(1.0, std::abs(dHdq)));
    }
  }
}

TEST_CASE("single peakon translates at speed p", "[peakon][evolve]") {
  auto t = evolve_peakons({{1.0}, {0.0}}, 1e-3, 5.0, 500);
  REQUIRE(t.snapshots.back().t == 5.0);
  REQUIRE(std::abs(t.snapshots.back().state.q[0] - 5.0) <= 1e-8);
  for (const auto& s : t.snapshots) REQUIRE(std::abs(s.state.q[0] - s.t) <= 1e-8);
}

TEST_CASE("two-peakon overtaking", "[peakon][evolve]") {
  const auto e0 = two_peakons();
  auto t = evolve_peakons(e0, 1e-3, 10.0, 100);
  const double H0 = hamiltonian(e0), P0 = total_momentum(e0);
  for (const auto& s : t.snapshots) {
    REQUIRE(std::abs(s.H - H0) <= 1e-8 * std::max(1.0, std::abs(H0)));
    REQUIRE(std::abs(s.P - P0) <= 1e-8);
    REQUIRE_FALSE(s.near_collision);
  }
  // Peakons do not pass through each other: positions keep their order and
  // the asymptotic momenta at t = -40 and t = +40 are exchanged. The past is
  // reached by flipping the momenta (H is even in p).
  auto fwd = evolve_peakons(e0, 1e-3, 40.0, 1000).snapshots.back().state;
  PeakonEnsemble flipped = e0;
  for (auto& p : flipped.p) p = -p;
  auto past = evolve_peakons(flipped, 1e-3, 40.0, 1000).snapshots.back().state;
  REQUIRE(fwd.q[0] < fwd.q[1]);
  REQUIRE(past.q[0] < past.q[1]);
  REQUIRE(fwd.q[1] - fwd.q[0] > 30.0);
  REQUIRE(past.q[1] - past.q[0] > 30.0);
  REQUIRE(fwd.p[0] == Approx(-past.p[1]).margin(1e-8));
  REQUIRE(fwd.p[1] == Approx(-past.p[0]).margin(1e-8));
}

TEST_CASE("time reversal recovers the initial positions", "[peakon][evolve]") {
  const auto e0 = two_peakons();
  auto fwd = evolve_peakons(e0, 1e-3, 10.0, 10000);
  auto mid = fwd.snapshots.back().state;
  for (auto& p : mid.p) p = -p;
  auto back = evolve_peakons(mid, 1e-3, 10.0, 10000).snapshots.back().state;
  for (std::size_t i = 0; i < e0.size(); ++i) REQUIRE(std::abs(back.q[i] - e0.q[i]) <= 1e-6);
}

TEST_CASE("peakon input validation and CSV", "[peakon][io]") {
  REQUIRE_THROWS_AS(evolve_peakons({{1.0, 2.0}, {0.0}}, 1e-3, 1.0), ConfigError);
  REQUIRE_THROWS_AS(evolve_peakons({{1.0}, {0.0}}, 0.0, 1.0), ConfigError);
  std::ostringstream os;
  write_peakon_csv(os, evolve_peakons(two_peakons(), 0.1, 0.2));
  REQUIRE(os.str().rfind("t,q_1,q_2,p_1,p_2,H,P\n", 0) == 0);
}

TEST_CASE("sampling an ensemble on a grid", "[peakon][field]") {
  Grid g(1024, 64.0);
  auto one = ensemble_to_field({{1.0}, {0.0}}, g);
  for (std::size_t i = 0; i < g.size(); ++i)
    REQUIRE(std::abs(one.field.values()[i] - pseudo_peakon(g.centered_node(i), 1.0)) <= 1e-8);
  REQUIRE_FALSE(one.leak_warning);
  REQUIRE(sup_norm(ensemble_to_field({}, g).field) == 0.0);
  REQUIRE(ensemble_to_field({{1.0}, {0.0}}, Grid(64, 16.0)).leak_warning);

  // Two peakons 20 apart: the L2 norm squared splits up to the cross term
  // 2 * integral of u_a u_b, evaluated here by quadrature.
  const double d = 20.0;
  auto a = ensemble_to_field({{1.0}, {-d / 2}}, g).field;
  auto b = ensemble_to_field({{1.0}, {d / 2}}, g).field;
  auto ab = ensemble_to_field({{1.0, 1.0}, {-d / 2, d / 2}}, g).field;
  const double na = sobolev_norm_integral(a, 0.0), nb = sobolev_norm_integral(b, 0.0);
  const double nab = sobolev_norm_integral(ab, 0.0);
  const double cross = 2.0 * integrate_panels([&](double x) { return pseudo_peakon(x + d / 2, 1.0) * pseudo_peakon(x - d / 2, 1.0); },
                                              uniform_breaks(-32.0, 32.0, 1.0), 1e-14);
  REQUIRE(cross < 1e-5);
  REQUIRE(std::abs(nab * nab - na * na - nb * nb - cross) <= 1e-9);
}

TEST_CASE("PDE flow carries a single pseudo-peakon at speed c", "[peakon][pde]") {
  // Weak solution tracked by a smooth discretization: loose H1 tolerance.
  Grid g(1024, 64.0);
  const double c = 1.0;
  auto u0 = ensemble_to_field({{c}, {0.0}}, g).field;
  EvolutionConfig cfg;
  cfg.grid = g;
  cfg.dt = 0.005;
  cfg.t_end = 0.5;
  cfg.keep_states = false;
  auto t = evolve(u0, cfg);
  REQUIRE_FALSE(t.blowup);
  auto exact = PeriodicField::sample_centered(g, [c](double x) { return pseudo_peakon(x, c, 0.5); });
  const double err = sobolev_norm(t.final_state() - exact, 1.0) / sobolev_norm(exact, 1.0);
  REQUIRE(err <= 0.05);
  // The tolerance is tight enough to tell speed c from speed 2c.
  auto fast = PeriodicField::sample_centered(g, [c](double x) { return pseudo_peakon(x - 0.5 * c, c, 0.5); });
  REQUIRE(sobolev_norm(t.final_state() - fast, 1.0) / sobolev_norm(fast, 1.0) > 0.05);
}
