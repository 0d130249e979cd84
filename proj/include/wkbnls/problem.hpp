#pragma once

// The Cauchy problem
//   i eps u_t + (eps^2/2) Lap u = V u + eps^kappa |u|^2 u,
//   u(0) = a0^eps e^{i phi0/eps},  a0^eps = a0 + eps a1 + eps^2 a2.

#include <optional>

#include "wkbnls/potential.hpp"
#include "wkbnls/spectral.hpp"

namespace wkbnls {

class SemiclassicalProblem {
 public:
  SemiclassicalProblem(double epsilon, double kappa, PotentialSpec potential, InitialPhaseSpec phase,
                       ComplexField a0, std::optional<ComplexField> a1 = std::nullopt,
                       std::optional<ComplexField> a2 = std::nullopt);

  double epsilon() const { return epsilon_; }
  int kappa() const { return kappa_; }
  const PeriodicGrid& grid() const { return a0_.grid(); }
  const PotentialSpec& potential() const { return potential_; }
  const InitialPhaseSpec& phase() const { return phase_; }
  const ComplexField& a0() const { return a0_; }
  // Zero field when the family has no first corrector.
  ComplexField a1() const;
  bool has_a1() const { return a1_.has_value(); }

  // a0 + eps a1 + eps^2 a2
  ComplexField initial_amplitude() const;
  // a0^eps e^{i phi0/eps} sampled on the grid.
  ComplexField initial_wavefunction() const;

  SemiclassicalProblem with_epsilon(double epsilon) const;
  SemiclassicalProblem with_a0(ComplexField a0) const;

 private:
  double epsilon_;
  int kappa_;
  PotentialSpec potential_;
  InitialPhaseSpec phase_;
  ComplexField a0_;
  std::optional<ComplexField> a1_;
  std::optional<ComplexField> a2_;
};

// amplitude * exp(-|x - center|^2 / width^2) * exp(i wavenumber.x)
ComplexField gaussian_profile(const PeriodicGrid& grid, double amplitude = 1.0, Point center = {},
                              double width = 1.0, Point wavenumber = {});
ComplexField constant_profile(const PeriodicGrid& grid, cplx value);

}  // namespace wkbnls
