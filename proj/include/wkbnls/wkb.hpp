#pragma once

// WKB approximants of the sub-critical and critical regimes,
//   u ~ a e^{i eps^{kappa-1} G} e^{i phi_eik / eps},
// and the small-time Taylor approximants u_K of the super-critical regime
// (V = phi0 = 0).

#include <optional>
#include <vector>

#include "wkbnls/problem.hpp"
#include "wkbnls/rays.hpp"
#include "wkbnls/spectral.hpp"

namespace wkbnls {

// a(t, x) = a0(y) / sqrt(J_t(y)), y = y(t, x).
ComplexField transport_amplitude(const RayBundle& bundle, const ComplexField& a0, double t);
ComplexField transport_amplitude(const RayBundle& bundle, const ComplexField& a0,
                                 const LagrangianLabels& labels);

// G(t, x) = -int_0^t J_s(y)^{-1} ds |a0(y)|^2, Simpson on the stored nodes.
RealField self_modulation_phase(const RayBundle& bundle, const ComplexField& a0, double t);
RealField self_modulation_phase(const RayBundle& bundle, const ComplexField& a0,
                                const LagrangianLabels& labels);

// a exp(i eps^{kappa-1} G) exp(i phi_eik / eps), kappa in {1, 2}.
ComplexField assemble_regime(const ComplexField& a, const RealField& g, const RealField& phi_eik,
                             double eps, int kappa);

// u exp(-i phi_eik / eps)
ComplexField extract_amplitude(const ComplexField& u, const RealField& phi_eik, double eps);

struct TaylorCoefficients {
  int K = 0;
  std::vector<RealField> phi;     // Phi_1..Phi_K (coefficients of t^{2j-1})
  std::vector<ComplexField> amp;  // a_1..a_K (coefficients of t^{2j})
  // Full power series of the phase and amplitude, orders 0..2K.
  std::vector<RealField> phase_series;
  std::vector<ComplexField> amplitude_series;
};

inline constexpr int kMaxTaylorOrder = 4;

// Order-by-order power-series solution of the skew-free system with V = phi0 = 0.
TaylorCoefficients taylor_phase_coefficients(const ComplexField& a0eps, int K);

// sum_{j<=K} t^{2j-1} Phi_j
RealField taylor_phase(const TaylorCoefficients& c, double t);

// a0eps exp(i sum_j t^{2j-1} Phi_j / eps)
ComplexField assemble_uK(const ComplexField& a0eps, const TaylorCoefficients& coeffs, double eps, double t);

// Leading modulus of u_1 - v_1 for data a0 and a0_tilde:
//   2 |a0 sin(theta / 2)|,  theta = t (|a0_tilde|^2 - |a0|^2) / eps.
RealField separation_profile(const ComplexField& a0, const ComplexField& a0_tilde, double delta, double eps,
                             double t);

enum class WKBRegime { subcritical, critical, supercritical_leading, supercritical_corrected, taylor };

const char* to_string(WKBRegime r);

struct WKBApproximant {
  WKBRegime regime;
  double time;
  double epsilon;
  int kappa;
  ComplexField a;
  RealField g;        // self-modulation phase; zero where unused
  RealField phase;    // phi_eik (rays), or the slow phase of the Grenier/Taylor routes
  RealField shift;    // phase multiplying e^{i shift} (phi^(1)); zero where unused
  double horizon;

  // a e^{i shift} e^{i eps^{kappa-1} g} e^{i phase / eps}
  ComplexField field() const;
};

// Ray-based approximant at time t for kappa in {1, 2}.  The Eulerian grid is
// the grid of the problem.
WKBApproximant wkb_approximant(const SemiclassicalProblem& problem, const RayBundle& bundle, double t);

}  // namespace wkbnls
