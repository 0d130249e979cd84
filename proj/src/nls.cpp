#include "wkbnls/nls.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "wkbnls/errors.hpp"
#include "wkbnls/fitting.hpp"

namespace wkbnls {

Diagnostics nls_diagnostics(const ComplexField& u, const RealField& potential, double eps, int kappa) {
  const double mass = std::pow(lp_norm(u, Norm::L2), 2);
  const double kinetic = 0.5 * eps * eps * std::pow(sobolev_norm(u, 1.0, true), 2);
  double pot = 0.0, quartic = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double r = std::norm(u[i]);
    pot += potential[i] * r;
    quartic += r * r;
  }
  const double dv = u.grid().cell_volume();
  return {mass, kinetic + dv * pot + 0.5 * std::pow(eps, kappa) * dv * quartic};
}

const ComplexField& NLSSolution::at(double t) const {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (std::abs(times[i] - t) <= 1e-12 * std::max(1.0, std::abs(t))) return u[i];
  }
  std::ostringstream os;
  os << "NLS solution has no stored state at t = " << t;
  throw std::invalid_argument(os.str());
}

double NLSSolution::mass_drift() const {
  double worst = 0.0;
  for (const auto& d : diagnostics) {
    worst = std::max(worst, std::abs(d.mass - diagnostics.front().mass) / diagnostics.front().mass);
  }
  return worst;
}

double NLSSolution::energy_drift() const {
  double worst = 0.0;
  const double e0 = diagnostics.front().energy;
  for (const auto& d : diagnostics) worst = std::max(worst, std::abs(d.energy - e0) / std::abs(e0));
  return worst;
}

double default_nls_dt(double eps) { return eps / kDefaultStepsPerEpsilon; }

int resolution_points(double extent, double eps, double c, int minimum) {
  const double need = std::max(static_cast<double>(minimum), c * extent / eps);
  int n = 8;
  while (n < need) n *= 2;
  return n;
}

NLSSolution solve_nls(const SemiclassicalProblem& problem, double t_final, double dt,
                      std::vector<double> output_times) {
  if (!(dt > 0.0) || !(t_final >= 0.0) || !std::isfinite(t_final)) {
    throw std::invalid_argument("solve_nls: dt must be positive and t_final non-negative");
  }
  const PeriodicGrid& grid = problem.grid();
  if (!problem.potential().periodic_on(grid)) {
    throw std::invalid_argument("solve_nls: the potential must be zero or bounded periodic on the box");
  }
  if (!problem.phase().periodic_on(grid)) {
    throw std::invalid_argument("solve_nls: the initial phase must be periodic on the box");
  }
  for (double t : output_times) {
    if (!(t >= 0.0 && t <= t_final)) throw std::invalid_argument("solve_nls: output time outside [0, t_final]");
  }
  output_times.push_back(0.0);
  output_times.push_back(t_final);
  std::sort(output_times.begin(), output_times.end());
  output_times.erase(std::unique(output_times.begin(), output_times.end()), output_times.end());

  const double eps = problem.epsilon();
  const int kappa = problem.kappa();
  const double coupling = std::pow(eps, kappa);
  const RealField vfield = problem.potential().sample(grid);
  const SpectralOps ops(grid);
  const ComplexField u0 = problem.initial_wavefunction();
  std::vector<cplx> u(u0.values().begin(), u0.values().end());

  NLSSolution sol{eps, kappa, dt, {}, {}, {}, 0.0, false};
  auto record = [&](double t) {
    const double frac = ops.upper_third_fraction(u);
    sol.max_upper_fraction = std::max(sol.max_upper_fraction, frac);
    if (frac > kResolutionAlarm) sol.resolution_alarm = true;
    ComplexField f(grid, u, "u");
    sol.diagnostics.push_back(nls_diagnostics(f, vfield, eps, kappa));
    sol.times.push_back(t);
    sol.u.push_back(std::move(f));
  };

  std::vector<cplx> phase(grid.size());
  double t_now = 0.0;
  record(0.0);
  for (std::size_t k = 1; k < output_times.size(); ++k) {
    const double span = output_times[k] - t_now;
    const long steps = std::max(1L, static_cast<long>(std::ceil(span / dt - 1e-9)));
    const double h = span / static_cast<double>(steps);
    const double half = 0.25 * eps * h;  // exp(-i eps |k|^2 h / 4)
    for (std::size_t i = 0; i < phase.size(); ++i) phase[i] = std::polar(1.0, -2.0 * half * ops.k_squared(i));
    const std::vector<cplx> first = [&] {
      std::vector<cplx> p(phase.size());
      for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::polar(1.0, -half * ops.k_squared(i));
      return p;
    }();
    // Adjacent kinetic half-steps are merged into one full step.
    for (long n = 0; n < steps; ++n) {
      ops.forward(u);
      const auto& mult = n == 0 ? first : phase;
      for (std::size_t i = 0; i < u.size(); ++i) u[i] *= mult[i];
      ops.inverse(u);
      for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] *= std::polar(1.0, -(h / eps) * (vfield[i] + coupling * std::norm(u[i])));
      }
    }
    ops.forward(u);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] *= first[i];
    ops.inverse(u);
    t_now = output_times[k];
    for (const auto& z : u) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw NonFiniteState("solve_nls", t_now);
    }
    record(t_now);
  }
  return sol;
}

StepAudit step_convergence_audit(const SemiclassicalProblem& problem, double t, std::vector<double> dt_list) {
  if (dt_list.size() < 3) throw std::invalid_argument("step_convergence_audit: need at least three steps");
  std::sort(dt_list.begin(), dt_list.end(), std::greater<>());
  const ComplexField ref = solve_nls(problem, t, dt_list.back()).u.back();
  StepAudit audit{{}, {}, 0.0, 0.0, false};
  for (std::size_t i = 0; i + 1 < dt_list.size(); ++i) {
    const ComplexField u = solve_nls(problem, t, dt_list[i]).u.back();
    audit.dts.push_back(dt_list[i]);
    audit.errors.push_back(lp_norm(u - ref, Norm::L2));
  }
  bool all_positive = true;
  for (double e : audit.errors) all_positive = all_positive && e > 0.0;
  if (all_positive && audit.errors.size() >= 2) {
    const LogLogFit fit = fit_loglog(audit.dts, audit.errors);
    audit.slope = fit.slope;
    audit.r_squared = fit.r_squared;
    audit.pass = std::abs(fit.slope - 2.0) <= 0.2;
  }
  return audit;
}

}  // namespace wkbnls
