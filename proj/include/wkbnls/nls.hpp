#pragma once

// Strang split-step Fourier solver for
//   i eps u_t + (eps^2/2) Lap u = V u + eps^kappa |u|^2 u
// on the periodic box of the problem.

#include <vector>

#include "wkbnls/problem.hpp"
#include "wkbnls/spectral.hpp"

namespace wkbnls {

struct Diagnostics {
  double mass;
  double energy;
};

Diagnostics nls_diagnostics(const ComplexField& u, const RealField& potential, double eps, int kappa);

struct NLSSolution {
  double epsilon;
  int kappa;
  double dt;  // nominal step; intervals between outputs are split evenly
  std::vector<double> times;
  std::vector<ComplexField> u;
  std::vector<Diagnostics> diagnostics;
  double max_upper_fraction = 0.0;
  bool resolution_alarm = false;

  const ComplexField& at(double t) const;
  // max_t |mass(t) - mass(0)| / mass(0)
  double mass_drift() const;
  double energy_drift() const;
};

inline constexpr double kDefaultStepsPerEpsilon = 50.0;
double default_nls_dt(double eps);

// Smallest power of two N >= max(minimum, c L / eps).
int resolution_points(double extent, double eps, double c = 0.25, int minimum = 1024);

// t = 0 and t_final are always stored; output_times must lie in [0, t_final].
NLSSolution solve_nls(const SemiclassicalProblem& problem, double t_final, double dt,
                      std::vector<double> output_times = {});

struct StepAudit {
  std::vector<double> dts;     // coarse steps (finest excluded)
  std::vector<double> errors;  // ||u_dt - u_finest||_{L^2}
  double slope;
  double r_squared;
  bool pass;
};

// Self-convergence of solve_nls against the smallest step in dt_list.
StepAudit step_convergence_audit(const SemiclassicalProblem& problem, double t, std::vector<double> dt_list);

}  // namespace wkbnls
