#include "wkbnls/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace wkbnls {

SemiclassicalProblem::SemiclassicalProblem(double epsilon, double kappa, PotentialSpec potential,
                                           InitialPhaseSpec phase, ComplexField a0,
                                           std::optional<ComplexField> a1,
                                           std::optional<ComplexField> a2)
    : epsilon_(epsilon),
      kappa_(0),
      potential_(std::move(potential)),
      phase_(std::move(phase)),
      a0_(std::move(a0)),
      a1_(std::move(a1)),
      a2_(std::move(a2)) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    throw std::invalid_argument("problem: epsilon must lie in (0, 1]");
  }
  if (kappa != 0.0 && kappa != 1.0 && kappa != 2.0) {
    throw std::invalid_argument("problem: only kappa in {0, 1, 2} is supported");
  }
  kappa_ = static_cast<int>(kappa);
  const int dim = a0_.grid().dim();
  if (potential_.dim() != dim || phase_.dim() != dim) {
    throw std::invalid_argument("problem: potential/phase dimension does not match the grid");
  }
  for (const auto* f : {a1_ ? &*a1_ : nullptr, a2_ ? &*a2_ : nullptr}) {
    if (f && !(f->grid() == a0_.grid())) {
      throw std::invalid_argument("problem: amplitude correctors must share the grid of a0");
    }
  }
}

ComplexField SemiclassicalProblem::a1() const {
  return a1_ ? *a1_ : ComplexField::zeros(grid(), "a1");
}

ComplexField SemiclassicalProblem::initial_amplitude() const {
  std::vector<cplx> v(a0_.values().begin(), a0_.values().end());
  if (a1_) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += epsilon_ * (*a1_)[i];
  }
  if (a2_) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += epsilon_ * epsilon_ * (*a2_)[i];
  }
  return ComplexField(grid(), std::move(v), "a0_eps");
}

ComplexField SemiclassicalProblem::initial_wavefunction() const {
  const ComplexField a = initial_amplitude();
  std::vector<cplx> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = a[i] * std::polar(1.0, phase_.value(grid().node(i)) / epsilon_);
  }
  return ComplexField(grid(), std::move(v), "u");
}

SemiclassicalProblem SemiclassicalProblem::with_epsilon(double epsilon) const {
  return SemiclassicalProblem(epsilon, kappa_, potential_, phase_, a0_, a1_, a2_);
}

SemiclassicalProblem SemiclassicalProblem::with_a0(ComplexField a0) const {
  return SemiclassicalProblem(epsilon_, kappa_, potential_, phase_, std::move(a0), a1_, a2_);
}

ComplexField gaussian_profile(const PeriodicGrid& grid, double amplitude, Point center, double width,
                              Point wavenumber) {
  if (!(width > 0.0)) throw std::invalid_argument("gaussian_profile: width must be positive");
  return sample(
      grid,
      [&](const Point& x) {
        double r2 = 0.0, ph = 0.0;
        for (int a = 0; a < grid.dim(); ++a) {
          const double d = x[a] - center[a];
          r2 += d * d;
          ph += wavenumber[a] * x[a];
        }
        return amplitude * std::exp(-r2 / (width * width)) * std::polar(1.0, ph);
      },
      "a0");
}

ComplexField constant_profile(const PeriodicGrid& grid, cplx value) {
  return ComplexField(grid, std::vector<cplx>(grid.size(), value), "a0");
}

}  // namespace wkbnls
