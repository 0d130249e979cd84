#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "wkbnls/field_io.hpp"
#include "wkbnls/nls.hpp"

using namespace wkbnls;
using std::numbers::pi;

namespace {

SemiclassicalProblem make(double eps, int kappa, ComplexField a0) {
  return SemiclassicalProblem(eps, kappa, PotentialSpec::zero(1), InitialPhaseSpec::zero(1), std::move(a0));
}

double sup_diff(const ComplexField& a, const ComplexField& b) { return lp_norm(a - b, Norm::Linf); }

}  // namespace

TEST_CASE("constant data evolves by a pure phase") {
  PeriodicGrid grid(8.0, 64);
  const cplx c(0.6, 0.8);
  const double eps = 0.01, t = 0.5;
  const auto sol = solve_nls(make(eps, 0, constant_profile(grid, c)), t, eps / 50.0);
  const auto& u = sol.u.back();
  for (std::size_t i = 0; i < grid.size(); i += 7) CHECK(std::abs(u[i] - c * std::polar(1.0, -t / eps)) < 1e-11);
}

TEST_CASE("constant data: every step size gives the same state") {
  PeriodicGrid grid(8.0, 64);
  const auto audit = step_convergence_audit(make(0.1, 0, constant_profile(grid, cplx(0.6, 0.8))), 0.2,
                                            {0.02, 0.01, 0.005, 0.0025});
  for (double e : audit.errors) CHECK(e < 1e-13);
}

TEST_CASE("plane waves are exact for every kappa") {
  const double L = 2.0 * pi;
  PeriodicGrid grid(L, 64);
  const double eps = 0.1, t = 0.3;
  const int m = 3;  // wavenumber of the amplitude, k = m
  const cplx c(0.5, 0.0);
  const auto a0 = sample(grid, [&](const Point& x) { return c * std::polar(1.0, m * x[0]); });
  for (int kappa : {0, 1, 2}) {
    const auto sol = solve_nls(make(eps, kappa, a0), t, 1e-3);
    const double omega = 0.5 * eps * m * m + std::pow(eps, kappa) * std::norm(c) / eps;
    const auto exact = sample(grid, [&](const Point& x) { return c * std::polar(1.0, m * x[0] - omega * t); });
    CHECK(sup_diff(sol.u.back(), exact) < 1e-12);
  }
}

TEST_CASE("mass and energy on Gaussian data") {
  PeriodicGrid grid(32.0, 1024);
  for (int kappa : {0, 1, 2}) {
    const double eps = 0.05;
    std::vector<double> outs{0.1, 0.2, 0.3, 0.4};
    const auto sol = solve_nls(make(eps, kappa, gaussian_profile(grid)), 0.5, default_nls_dt(eps), outs);
    CHECK(sol.times.size() == 6);
    CHECK(sol.mass_drift() <= 1e-10);
    CHECK(sol.energy_drift() <= 1e-6);
    CHECK_FALSE(sol.resolution_alarm);
    CHECK(sol.at(0.3).size() == grid.size());
    CHECK_THROWS(sol.at(0.25));
  }
}

TEST_CASE("diagnostics of constant data") {
  PeriodicGrid grid(8.0, 64);
  const cplx c(0.6, 0.8);
  const auto d = nls_diagnostics(constant_profile(grid, c), RealField::zeros(grid), 0.1, 0);
  CHECK(d.mass == doctest::Approx(8.0));
  CHECK(d.energy == doctest::Approx(0.5 * 8.0));
}

TEST_CASE("gauge equivariance") {
  PeriodicGrid grid(32.0, 512);
  const double eps = 0.05, theta = 0.7;
  const auto a0 = gaussian_profile(grid);
  const auto u = solve_nls(make(eps, 0, a0), 0.2, 1e-3).u.back();
  const auto v = solve_nls(make(eps, 0, std::polar(1.0, theta) * a0), 0.2, 1e-3).u.back();
  CHECK(sup_diff(v, std::polar(1.0, theta) * u) < 1e-13);
}

TEST_CASE("second-order self-convergence") {
  PeriodicGrid grid(32.0, 1024);
  const double eps = 0.05;
  const auto audit = step_convergence_audit(make(eps, 0, gaussian_profile(grid)), 0.2,
                                            {eps / 5.0, eps / 10.0, eps / 20.0, eps / 40.0, eps / 320.0});
  CHECK(audit.dts.size() == 4);
  CHECK(audit.slope == doctest::Approx(2.0).epsilon(0.1));
  CHECK(audit.r_squared >= 0.99);
  CHECK(audit.pass);
}

TEST_CASE("scaling law maps eps = 1 solutions to semiclassical ones") {
  // psi(t, x) = lambda^{n/2 - s} u(lambda^{n/2 + 1 - s} t, lambda x), eps = lambda^{n/2 - 1 - s}, n = 1
  const double s = 0.25, lambda = 4.0;
  const double p = 0.5 - s, q = 1.5 - s;
  const double eps = std::pow(lambda, -0.5 - s);
  const double L = 16.0, t = 0.2, dt = t / 400.0;
  const int n = 512;
  PeriodicGrid gpsi(L, n), gu(lambda * L, n);
  const auto u0 = sample(gu, [&](const Point& x) { return cplx(std::exp(-x[0] * x[0] / (lambda * lambda))); });
  const auto psi0 = sample(gpsi, [&](const Point& x) { return cplx(std::pow(lambda, p) * std::exp(-x[0] * x[0])); });
  const auto psi = solve_nls(make(eps, 0, psi0), t, dt).u.back();
  const auto u = solve_nls(make(1.0, 0, u0), std::pow(lambda, q) * t, std::pow(lambda, q) * dt).u.back();
  double gap = 0.0;
  for (std::size_t i = 0; i < gpsi.size(); ++i) gap = std::max(gap, std::abs(psi[i] - std::pow(lambda, p) * u[i]));
  CHECK(gap <= 1e-6);
  CHECK(lp_norm(psi, Norm::Linf) > 0.5);
}

TEST_CASE("resolution rule") {
  CHECK(resolution_points(32.0, 1e-3) == 8192);
  CHECK(resolution_points(32.0, 1e-1) == 1024);
  CHECK(resolution_points(32.0, 2e-3) == 4096);
  CHECK(default_nls_dt(0.01) == doctest::Approx(2e-4));
}

TEST_CASE("invalid requests") {
  PeriodicGrid grid(8.0, 64);
  const auto p = make(0.1, 0, gaussian_profile(grid));
  CHECK_THROWS(solve_nls(p, 0.1, 1e-3, {0.2}));
  CHECK_THROWS(solve_nls(p, 0.1, -1e-3));
  SemiclassicalProblem harm(0.1, 0, PotentialSpec::harmonic({1.0}), InitialPhaseSpec::zero(1), gaussian_profile(grid));
  CHECK_THROWS(solve_nls(harm, 0.1, 1e-3));
}

TEST_CASE("bounded periodic potential conserves mass") {
  const double L = 2.0 * pi;
  PeriodicGrid grid(L, 256);
  SemiclassicalProblem p(0.05, 1, PotentialSpec::periodic(1, {L, 0.0}, {{0.5, {1, 0}, 0.0}}), InitialPhaseSpec::zero(1),
                         gaussian_profile(grid));
  const auto sol = solve_nls(p, 0.3, 1e-3);
  CHECK(sol.mass_drift() <= 1e-10);
}

TEST_CASE("diagnostics CSV") {
  PeriodicGrid grid(16.0, 128);
  const auto sol = solve_nls(make(0.1, 0, gaussian_profile(grid)), 0.1, 1e-2, {0.05});
  std::ostringstream os;
  write_nls_csv(sol, os);
  const std::string text = os.str();
  CHECK(text.rfind("t,mass,energy,upper_fraction\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
}
