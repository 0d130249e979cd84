#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "wkbnls/errors.hpp"
#include "wkbnls/rays.hpp"

using namespace wkbnls;
using std::numbers::pi;

namespace {

InitialPhaseSpec quadratic_phase(double q) { return InitialPhaseSpec::quadratic(1, Mat2{{{q, 0.0}, {0.0, 0.0}}}); }

double worst_hj(const RayBundle& b, const PeriodicGrid& grid, SpatialDerivative mode, std::size_t stride) {
  double worst = 0.0;
  for (std::size_t node = 3; node + 3 < b.node_count(); node += stride) {
    if (b.time(node + 3) >= b.caustic_horizon()) break;
    worst = std::max(worst, hamilton_jacobi_residual(b, grid, node, mode));
  }
  return worst;
}

}  // namespace

TEST_CASE("single harmonic ray matches the closed form") {
  const auto v = PotentialSpec::harmonic({1.0});
  const auto phi0 = InitialPhaseSpec::zero(1);
  const double y = 1.7;
  RayState s = initial_ray_state(phi0, {y, 0.0});
  s = integrate_ray(v, s, 0.0, 1.0, 1000);
  CHECK(std::abs(s.x[0] - y * std::cos(1.0)) < 1e-12);
  CHECK(std::abs(s.xi[0] + y * std::sin(1.0)) < 1e-12);
  CHECK(std::abs(s.m[0][0] - std::cos(1.0)) < 1e-12);
  // S' = |xi|^2/2 - V = -y^2 cos(2t)/2
  CHECK(std::abs(s.action + 0.25 * y * y * std::sin(2.0)) < 1e-12);
}

TEST_CASE("harmonic bundle: positions, Jacobian and caustic") {
  PeriodicGrid markers(100.0, 512);
  const auto bundle = integrate_flow(PotentialSpec::harmonic({1.0}), InitialPhaseSpec::zero(1), markers, 2.0, 1e-3);
  CHECK(bundle.node_count() == 2001);
  double ex = 0.0, ej = 0.0;
  for (std::size_t node = 0; node < bundle.node_count(); node += 50) {
    const double t = bundle.time(node);
    for (std::size_t m = 0; m < bundle.marker_count(); m += 7) {
      const double y = markers.node(m)[0];
      ex = std::max(ex, std::abs(bundle.position(node, m)[0] - y * std::cos(t)));
      ej = std::max(ej, std::abs(bundle.jacobian(node, m) - std::cos(t)));
    }
  }
  CHECK(ex < 1e-8);
  CHECK(ej < 1e-8);
  CHECK(bundle.caustic_horizon() == doctest::Approx(std::acos(0.1)).epsilon(1e-6));
  const auto t_star = caustic_time(bundle, 1e-12);
  REQUIRE(t_star.has_value());
  CHECK(std::abs(*t_star - pi / 2.0) < 1e-8);
  CHECK_FALSE(caustic_time(integrate_flow(PotentialSpec::harmonic({1.0}), InitialPhaseSpec::zero(1), markers, 1.0,
                                          1e-3),
                           1e-12)
                  .has_value());
}

TEST_CASE("free flow with a quadratic phase") {
  const double q = -0.5;
  PeriodicGrid markers(60.0, 512);
  PeriodicGrid grid(8.0, 64);
  const auto bundle = integrate_flow(PotentialSpec::zero(1), quadratic_phase(q), markers, 1.5, 1e-3);
  const double t = 1.2;
  const auto labels = invert_flow(bundle, t, grid);
  CHECK(labels.worst_residual < 1e-10);
  double ey = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    ey = std::max(ey, std::abs(labels.y[i][0] - grid.node(i)[0] / (1.0 + q * t)));
  }
  CHECK(ey < 1e-9);
  const auto phi = eikonal_phase(bundle, t, grid);
  double ep = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.node(i)[0];
    ep = std::max(ep, std::abs(phi[i] - 0.5 * q * x * x / (1.0 + q * t)));
  }
  CHECK(ep < 1e-9);
  // J = 1 + q t reaches 0.1 at t = 1.8
  CHECK(std::isinf(bundle.caustic_horizon()));
  const auto longer = integrate_flow(PotentialSpec::zero(1), quadratic_phase(q), markers, 1.9, 1e-3);
  CHECK(longer.caustic_horizon() == doctest::Approx(1.8).epsilon(1e-9));
  CHECK_THROWS_AS(invert_flow(longer, 1.85, grid), CausticCrossed);
}

TEST_CASE("eikonal residual on the potential fixtures") {
  SUBCASE("zero potential, focusing quadratic phase") {
    PeriodicGrid markers(200.0, 2048);
    PeriodicGrid grid(8.0, 64);
    const auto b = integrate_flow(PotentialSpec::zero(1), quadratic_phase(-0.5), markers, 1.9, 1e-3);
    CHECK(worst_hj(b, grid, SpatialDerivative::finite_difference, 97) < 1e-6);
  }
  SUBCASE("harmonic potential") {
    PeriodicGrid markers(100.0, 512);
    PeriodicGrid grid(8.0, 64);
    const auto b = integrate_flow(PotentialSpec::harmonic({1.0}), InitialPhaseSpec::zero(1), markers, 2.0, 1e-3);
    CHECK(worst_hj(b, grid, SpatialDerivative::finite_difference, 97) < 1e-6);
  }
  SUBCASE("bounded periodic potential") {
    const double L = 2.0 * pi;
    PeriodicGrid grid(L, 512);
    const auto v = PotentialSpec::periodic(1, {L, 0.0}, {{0.5, {1, 0}, 0.0}});
    const auto b = integrate_flow(v, InitialPhaseSpec::zero(1), grid, 3.0, 1e-3);
    CHECK(b.periodic());
    CHECK(b.caustic_horizon() < 3.0);
    CHECK(worst_hj(b, grid, SpatialDerivative::spectral, 61) < 1e-6);
  }
}

TEST_CASE("labels outside a non-periodic marker range are refused") {
  PeriodicGrid grid(8.0, 64);
  const auto b = integrate_flow(PotentialSpec::harmonic({1.0}), InitialPhaseSpec::zero(1), grid, 1.0, 1e-3);
  CHECK_THROWS_AS(invert_flow(b, 0.5, grid), InversionFailure);
}

TEST_CASE("2D harmonic bundle and inversion") {
  PeriodicGrid markers({40.0, 40.0}, {64, 64});
  PeriodicGrid grid({6.0, 6.0}, {16, 16});
  const auto b = integrate_flow(PotentialSpec::harmonic({1.0, 2.0}), InitialPhaseSpec::zero(2), markers, 0.5, 1e-3);
  const double t = 0.5;
  const std::size_t node = b.node_at(t);
  CHECK(b.jacobian(node, 5) == doctest::Approx(std::cos(t) * std::cos(2.0 * t)).epsilon(1e-10));
  const auto labels = invert_flow(b, t, grid);
  double ey = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto x = grid.node(i);
    ey = std::max(ey, std::abs(labels.y[i][0] - x[0] / std::cos(t)));
    ey = std::max(ey, std::abs(labels.y[i][1] - x[1] / std::cos(2.0 * t)));
  }
  CHECK(ey < 1e-9);
}

TEST_CASE("node lookup and CSV output") {
  PeriodicGrid markers(8.0, 16);
  const auto b = integrate_flow(PotentialSpec::zero(1), InitialPhaseSpec::zero(1), markers, 0.1, 1e-2);
  CHECK(b.node_at(0.05) == 5);
  CHECK_THROWS(b.node_at(0.055));
  std::ostringstream os;
  write_bundle_csv(b, os, 5);
  const std::string text = os.str();
  CHECK(text.rfind("t,y,x,xi,J,S\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 3 * 16);
}
