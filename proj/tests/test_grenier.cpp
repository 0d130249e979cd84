#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "wkbnls/field_io.hpp"
#include "wkbnls/grenier.hpp"

using namespace wkbnls;

namespace {

SemiclassicalProblem gaussian_problem(double eps, const PeriodicGrid& grid,
                                      std::optional<ComplexField> a1 = std::nullopt) {
  return SemiclassicalProblem(eps, 0, PotentialSpec::zero(1), InitialPhaseSpec::zero(1), gaussian_profile(grid),
                              std::move(a1));
}

double mass(const ComplexField& a) { return std::pow(lp_norm(a, Norm::L2), 2); }

}  // namespace

TEST_CASE("constant amplitude: phi = -|c|^2 t in every variant") {
  PeriodicGrid grid(8.0, 64);
  const cplx c(0.3, 0.4);
  SemiclassicalProblem p(0.05, 0, PotentialSpec::zero(1), InitialPhaseSpec::zero(1), constant_profile(grid, c));
  for (auto v : {GrenierVariant::full, GrenierVariant::skew_free, GrenierVariant::limit}) {
    const auto traj = solve_phase_amplitude(p, 0.5, 1e-2, v, 10);
    CHECK(traj.states.size() == 6);
    const auto& s = traj.states.back();
    CHECK(s.t == doctest::Approx(0.5));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(std::abs(s.a[i] - c) < 1e-13);
      CHECK(std::abs(s.phi[i] + 0.25 * 0.5) < 1e-13);
    }
  }
}

TEST_CASE("mass, velocity consistency and resolution on Gaussian data") {
  PeriodicGrid grid(32.0, 1024);
  const auto p = gaussian_problem(0.05, grid);
  const auto traj = solve_phase_amplitude(p, 0.2, 1e-3, GrenierVariant::full, 20);
  const double m0 = mass(traj.states.front().a);
  for (const auto& s : traj.states) CHECK(std::abs(mass(s.a) - m0) / m0 < 1e-8);
  CHECK(velocity_consistency(traj) < 1e-10);
  CHECK_FALSE(traj.resolution_alarm);
  CHECK(traj.at(0.1).t == doctest::Approx(0.1));
  CHECK_THROWS(traj.at(0.105));
  CHECK_THROWS(solve_phase_amplitude(p, 0.2, 1e-3, GrenierVariant::full, 30));
  CHECK_THROWS(solve_phase_amplitude(p.with_epsilon(0.05), 0.2, 1e-3, GrenierVariant::corrector));
}

TEST_CASE("limit variant starts from a0 and records eps = 0") {
  PeriodicGrid grid(32.0, 512);
  const auto a1 = gaussian_profile(grid, 1.0, {1.0, 0.0});
  const auto p = gaussian_problem(0.1, grid, a1);
  const auto lim = solve_phase_amplitude(p, 0.1, 1e-3, GrenierVariant::limit, 10);
  CHECK(lim.epsilon == 0.0);
  double gap = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) gap = std::max(gap, std::abs(lim.states.front().a[i] - p.a0()[i]));
  CHECK(gap == 0.0);
  const auto full = solve_phase_amplitude(p, 0.1, 1e-3, GrenierVariant::full, 10);
  CHECK(lp_norm(full.states.front().a - p.initial_amplitude(), Norm::Linf) == 0.0);
}

TEST_CASE("limit system is time reversible") {
  PeriodicGrid grid(32.0, 512);
  const auto p = gaussian_problem(0.1, grid);
  const auto fwd = solve_phase_amplitude(p, 0.1, 1e-3, GrenierVariant::limit, 100);
  const auto& end = fwd.states.back();
  SemiclassicalProblem back_p(0.1, 0, PotentialSpec::zero(1), InitialPhaseSpec::sampled(end.phi), end.a);
  const auto back = solve_phase_amplitude(back_p, -0.1, 1e-3, GrenierVariant::limit, 100);
  CHECK(back.states.back().t == doctest::Approx(-0.1));
  CHECK(lp_norm(back.states.back().a - p.a0(), Norm::Linf) < 1e-9);
  CHECK(lp_norm(back.states.back().phi, Norm::Linf) < 1e-9);
}

TEST_CASE("phase shift vanishes for real a0 and a1 = 0") {
  PeriodicGrid grid(32.0, 1024);
  const auto p = gaussian_problem(0.01, grid);
  const auto lim = solve_phase_amplitude(p, 0.2, 1e-3, GrenierVariant::limit);
  const auto corr = solve_corrector(lim, ComplexField::zeros(grid), 2e-3);
  double worst = 0.0;
  for (const auto& s : corr.states) worst = std::max(worst, lp_norm(s.phi1, Norm::Linf));
  CHECK(worst <= 1e-10);
  CHECK(corr.states.back().t == doctest::Approx(0.2));
  // but a1 itself is driven by i Lap a0 / 2
  CHECK(lp_norm(corr.states.back().a1, Norm::Linf) > 1e-3);
}

TEST_CASE("real a1 produces a phase shift") {
  PeriodicGrid grid(32.0, 1024);
  const auto a1 = gaussian_profile(grid);
  const auto p = gaussian_problem(0.01, grid, a1);
  const auto lim = solve_phase_amplitude(p, 0.2, 1e-3, GrenierVariant::limit);
  const auto corr = solve_corrector(lim, a1, 2e-3);
  CHECK(lp_norm(corr.states.back().phi1, Norm::Linf) > 1e-2);
  CHECK_THROWS(solve_corrector(lim, a1, 3e-3));
  CHECK_THROWS(solve_corrector(lim, a1, 1e-3));
}

TEST_CASE("assembled wave function") {
  PeriodicGrid grid(16.0, 128);
  GrenierState s{0.0, gaussian_profile(grid), sample_real(grid, [](const Point& x) { return 0.5 * std::cos(x[0]); }), {}};
  const double eps = 0.1;
  const auto u = assemble_supercritical(s, eps);
  CorrectorState c{0.0, ComplexField::zeros(grid), sample_real(grid, [](const Point&) { return 0.25; })};
  const auto uc = assemble_supercritical(s, eps, c);
  for (std::size_t i = 0; i < grid.size(); i += 9) {
    CHECK(std::abs(u[i] - s.a[i] * std::polar(1.0, s.phi[i] / eps)) < 1e-14);
    CHECK(std::abs(uc[i] - u[i] * std::polar(1.0, 0.25)) < 1e-14);
  }
}

TEST_CASE("Euler residual is second order in the output spacing") {
  PeriodicGrid grid(32.0, 512);
  const auto p = gaussian_problem(0.1, grid);
  const auto coarse = solve_phase_amplitude(p, 0.2, 5e-4, GrenierVariant::limit, 40);
  const auto fine = solve_phase_amplitude(p, 0.2, 5e-4, GrenierVariant::limit, 20);
  const double rc = euler_residual(coarse).max();
  const double rf = euler_residual(fine).max();
  CHECK(rc / rf == doctest::Approx(4.0).epsilon(0.1));
  CHECK_THROWS(euler_residual(solve_phase_amplitude(p, 0.2, 5e-4, GrenierVariant::full, 40)));
}

TEST_CASE("diagnostics CSV") {
  PeriodicGrid grid(16.0, 128);
  const auto traj = solve_phase_amplitude(gaussian_problem(0.1, grid), 0.02, 1e-2, GrenierVariant::full);
  std::ostringstream os;
  write_grenier_csv(traj, os);
  const std::string text = os.str();
  CHECK(text.rfind("t,mass,amplitude_max,phase_max,velocity_residual\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
}
