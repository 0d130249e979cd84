#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "wkbnls/errors.hpp"
#include "wkbnls/wkb.hpp"

using namespace wkbnls;

namespace {

InitialPhaseSpec quadratic_phase(double q) { return InitialPhaseSpec::quadratic(1, Mat2{{{q, 0.0}, {0.0, 0.0}}}); }

template <class F, class G>
double sup_gap(const F& field, G&& exact) {
  double w = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) w = std::max(w, std::abs(field[i] - exact(field.grid().node(i)[0])));
  return w;
}

}  // namespace

TEST_CASE("transport amplitude and self-modulation for a defocusing quadratic phase") {
  const double q = 0.5, t = 1.0;
  PeriodicGrid grid(16.0, 256);
  PeriodicGrid markers(40.0, 1024);
  const auto a0 = gaussian_profile(grid);
  const auto b = integrate_flow(PotentialSpec::zero(1), quadratic_phase(q), markers, t, 1e-3);
  const double j = 1.0 + q * t;
  const auto a = transport_amplitude(b, a0, t);
  CHECK(sup_gap(a, [&](double x) { return cplx(std::exp(-x * x / (j * j)) / std::sqrt(j)); }) < 1e-9);
  // G = -|a0(y)|^2 log(1 + q t) / q
  const auto g = self_modulation_phase(b, a0, t);
  CHECK(sup_gap(g, [&](double x) { return -std::exp(-2.0 * x * x / (j * j)) * std::log(j) / q; }) < 1e-9);
}

TEST_CASE("critical approximant without potential or phase") {
  PeriodicGrid grid(32.0, 1024);
  const double eps = 0.01, t = 0.5;
  SemiclassicalProblem p(eps, 1, PotentialSpec::zero(1), InitialPhaseSpec::zero(1), gaussian_profile(grid));
  const auto b = integrate_flow(p, grid, t, 1e-3);
  const auto w = wkb_approximant(p, b, t);
  CHECK(w.regime == WKBRegime::critical);
  const auto u = w.field();
  CHECK(sup_gap(u, [&](double x) {
          const double a = std::exp(-x * x);
          return a * std::polar(1.0, -t * a * a);
        }) < 1e-12);
  double modulus_gap = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) modulus_gap = std::max(modulus_gap, std::abs(std::abs(u[i]) - std::abs(w.a[i])));
  CHECK(modulus_gap < 1e-12);
}

TEST_CASE("sub-critical approximant carries eps G") {
  PeriodicGrid grid(32.0, 1024);
  const double eps = 0.01, t = 0.5;
  SemiclassicalProblem p(eps, 2, PotentialSpec::zero(1), InitialPhaseSpec::zero(1), gaussian_profile(grid));
  const auto b = integrate_flow(p, grid, t, 1e-3);
  const auto u = wkb_approximant(p, b, t).field();
  CHECK(sup_gap(u, [&](double x) {
          const double a = std::exp(-x * x);
          return a * std::polar(1.0, -eps * t * a * a);
        }) < 1e-12);
}

TEST_CASE("approximant past the caustic is refused") {
  PeriodicGrid grid(8.0, 64);
  PeriodicGrid markers(200.0, 2048);
  SemiclassicalProblem p(0.01, 1, PotentialSpec::harmonic({1.0}), InitialPhaseSpec::zero(1), gaussian_profile(grid));
  const auto b = integrate_flow(p, markers, 1.6, 1e-3);
  CHECK_THROWS_AS(wkb_approximant(p, b, 1.55), CausticCrossed);
  SemiclassicalProblem p0(0.01, 0, PotentialSpec::zero(1), InitialPhaseSpec::zero(1), gaussian_profile(grid));
  CHECK_THROWS(wkb_approximant(p0, b, 0.1));
}

TEST_CASE("harmonic transport amplitude") {
  PeriodicGrid grid(12.0, 128);
  PeriodicGrid markers(100.0, 1024);
  SemiclassicalProblem p(0.05, 1, PotentialSpec::harmonic({1.0}), InitialPhaseSpec::zero(1), gaussian_profile(grid));
  const double t = 1.0;
  const auto b = integrate_flow(p, markers, t, 1e-3);
  const auto w = wkb_approximant(p, b, t);
  const double c = std::cos(t);
  CHECK(sup_gap(w.a, [&](double x) { return cplx(std::exp(-x * x / (c * c)) / std::sqrt(c)); }) < 1e-8);
  // phi = -x^2 tan(t) / 2
  CHECK(sup_gap(w.phase, [&](double x) { return -0.5 * x * x * std::tan(t); }) < 1e-8);
}

TEST_CASE("regime assembly and amplitude extraction are inverse") {
  PeriodicGrid grid(16.0, 128);
  const auto a = gaussian_profile(grid, 1.0, {}, 1.0, {0.7, 0.0});
  const auto g = sample_real(grid, [](const Point& x) { return std::sin(x[0]); });
  const auto phi = sample_real(grid, [](const Point& x) { return 0.1 * x[0] * x[0]; });
  const auto u = assemble_regime(a, g, phi, 0.02, 1);
  const auto back = extract_amplitude(u, phi, 0.02);
  double gap = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) gap = std::max(gap, std::abs(back[i] - a[i] * std::polar(1.0, g[i])));
  CHECK(gap < 1e-12);
}

TEST_CASE("Taylor coefficients of Gaussian data") {
  PeriodicGrid grid(32.0, 1024);
  const auto a0 = gaussian_profile(grid);
  const auto c = taylor_phase_coefficients(a0, 2);
  REQUIRE(c.phi.size() == 2);
  REQUIRE(c.amp.size() == 2);
  CHECK(sup_gap(c.phi[0], [](double x) { return -std::exp(-2.0 * x * x); }) < 1e-12);
  CHECK(sup_gap(c.amp[0], [](double x) { return cplx((8.0 * x * x - 1.0) * std::exp(-3.0 * x * x)); }) < 1e-11);
  CHECK(sup_gap(c.phi[1], [](double x) { return (2.0 / 3.0 - 8.0 * x * x) * std::exp(-4.0 * x * x); }) < 1e-11);
  // even phase orders vanish for real data
  CHECK(lp_norm(c.phase_series[2], Norm::Linf) < 1e-14);
  const auto phase = taylor_phase(c, 0.1);
  CHECK(sup_gap(phase, [](double x) {
          return -0.1 * std::exp(-2.0 * x * x) + 1e-3 * (2.0 / 3.0 - 8.0 * x * x) * std::exp(-4.0 * x * x);
        }) < 1e-12);
  CHECK_THROWS(taylor_phase_coefficients(a0, kMaxTaylorOrder + 1));
  CHECK_THROWS(taylor_phase_coefficients(a0, 0));
}

TEST_CASE("u_1 is exact on constant data") {
  PeriodicGrid grid(8.0, 64);
  const cplx c(0.6, 0.8);
  const auto a0 = constant_profile(grid, c);
  const double eps = 0.01, t = 0.3;
  const auto u = assemble_uK(a0, taylor_phase_coefficients(a0, 1), eps, t);
  CHECK(sup_gap(u, [&](double) { return c * std::polar(1.0, -t / eps); }) < 1e-12);
}

TEST_CASE("separation profile") {
  PeriodicGrid grid(32.0, 512);
  const auto a0 = gaussian_profile(grid);
  const double eps = 0.01, delta = 0.1, t = 2.0 * eps / delta;
  CHECK(lp_norm(separation_profile(a0, a0, delta, eps, t), Norm::Linf) == 0.0);
  CHECK_THROWS(separation_profile(a0, a0, 0.0, eps, t));

  // |u_1 - v_1| differs from the profile by at most |a0 - a0~| pointwise.
  std::vector<cplx> tilde(a0.size());
  for (std::size_t i = 0; i < tilde.size(); ++i) tilde[i] = (1.0 + delta) * a0[i];
  const ComplexField a0t(grid, tilde);
  const auto prof = separation_profile(a0, a0t, delta, eps, t);
  const auto u = assemble_uK(a0, taylor_phase_coefficients(a0, 1), eps, t);
  const auto v = assemble_uK(a0t, taylor_phase_coefficients(a0t, 1), eps, t);
  double excess = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    excess = std::max(excess, std::abs(std::abs(u[i] - v[i]) - prof[i]) - std::abs(a0t[i] - a0[i]));
  }
  CHECK(excess < 1e-12);
  CHECK(lp_norm(prof, Norm::L2) > 0.5);
}

TEST_CASE("regime names") {
  CHECK(std::string(to_string(WKBRegime::critical)) == "critical");
  CHECK(std::string(to_string(WKBRegime::taylor)) == "taylor");
}
