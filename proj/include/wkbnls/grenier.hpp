#pragma once

// Super-critical (kappa = 0) phase/amplitude formulation u = a e^{i phi / eps}:
//   phi_t + |grad phi|^2 / 2 + V + |a|^2 = 0,
//   a_t + grad phi . grad a + a Lap phi / 2 = i eps Lap a / 2.
// Variants: full (as written), skew_free (right-hand side of the a-equation
// dropped) and limit (eps = 0, starting from a0 instead of a0^eps).

#include <optional>
#include <string>
#include <vector>

#include "wkbnls/problem.hpp"
#include "wkbnls/spectral.hpp"

namespace wkbnls {

enum class GrenierVariant { full, skew_free, limit, corrector };

const char* to_string(GrenierVariant v);

struct GrenierState {
  double t;
  ComplexField a;
  RealField phi;
  std::vector<RealField> v;  // grad phi, one field per axis
};

struct GrenierTrajectory {
  GrenierVariant variant;
  double epsilon;  // 0 for the limit system
  double dt;       // signed integration step
  double output_dt;
  PeriodicGrid grid;
  RealField potential;
  std::vector<GrenierState> states;
  double max_upper_fraction = 0.0;
  bool resolution_alarm = false;

  // Stored state at time t (must be an output time).
  const GrenierState& at(double t) const;
};

// RK4 for the transport part with dealiased right-hand sides; the full variant
// wraps each step in exact half-steps of the i eps Lap / 2 term (Strang).
// States are stored every `output_every` steps, t = 0 included.  t_final may be
// negative (backward integration).
GrenierTrajectory solve_phase_amplitude(const SemiclassicalProblem& problem, double t_final, double dt,
                                        GrenierVariant variant, int output_every = 1);

struct CorrectorState {
  double t;
  ComplexField a1;
  RealField phi1;
};

struct CorrectorTrajectory {
  double dt;
  std::vector<CorrectorState> states;
  const CorrectorState& at(double t) const;
};

// First correctors (phi^(1), a^(1)) linearised around the limit trajectory,
// with source i Lap a / 2.  RK4 stages must land on stored limit states, so dt
// has to be an even multiple of the limit output spacing.
CorrectorTrajectory solve_corrector(const GrenierTrajectory& limit, const ComplexField& a1, double dt);

// a e^{i phi / eps}, or a e^{i phi1} e^{i phi / eps} with a corrector.
ComplexField assemble_supercritical(const GrenierState& state, double eps,
                                    const std::optional<CorrectorState>& corrector = std::nullopt);

struct EulerResidual {
  double momentum;
  double continuity;
  double max() const { return momentum > continuity ? momentum : continuity; }
};

// Residuals of rho_t + div(rho v) = 0 and v_t + v.grad v + grad V + grad rho = 0
// on interior stored states (centred differences in time).
EulerResidual euler_residual(const GrenierTrajectory& limit);

// sup_t ||v - grad phi||_inf over stored states.
double velocity_consistency(const GrenierTrajectory& trajectory);

}  // namespace wkbnls
