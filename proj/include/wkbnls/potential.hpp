#pragma once

// External potentials V(t,x) and initial phases phi_0(y), both evaluable at
// arbitrary points together with their first and second derivatives.

#include <array>
#include <memory>
#include <vector>

#include "wkbnls/spectral.hpp"

namespace wkbnls {

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<std::array<double, 2>, 2>;

// Real trigonometric polynomial sum_j c_j cos(k_j.x) + s_j sin(k_j.x).
class TrigSeries {
 public:
  struct Term {
    Vec2 k;
    double c;
    double s;
  };

  TrigSeries() = default;
  explicit TrigSeries(std::vector<Term> terms) : terms_(std::move(terms)) {}
  // Exact trigonometric interpolant of a sampled field; modes whose
  // coefficient is below `drop_below` (relative to the largest) are discarded.
  static TrigSeries from_samples(const RealField& f, double drop_below = 1e-15);

  double value(const Point& x) const;
  Vec2 gradient(const Point& x) const;
  Mat2 hessian(const Point& x) const;
  const std::vector<Term>& terms() const { return terms_; }

 private:
  std::vector<Term> terms_;
};

class PotentialSpec {
 public:
  enum class Kind { zero, harmonic, bounded_periodic };

  struct Mode {
    double amplitude;
    std::array<int, 2> wave;  // integer multiples of 2*pi/L per axis
    double phase;
  };

  static PotentialSpec zero(int dim = 1);
  // V = 1/2 sum_i omega_i^2 x_i^2
  static PotentialSpec harmonic(std::vector<double> omega);
  // V = sum_m A_m cos(2*pi*(wave_m/L).x + phase_m), periodic on the box `extent`.
  static PotentialSpec periodic(int dim, Vec2 extent, std::vector<Mode> modes);
  static PotentialSpec sampled(const RealField& v);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  const std::vector<double>& omega() const { return omega_; }
  Vec2 box() const { return box_; }

  double value(double t, const Point& x) const;
  Vec2 gradient(double t, const Point& x) const;
  Mat2 hessian(double t, const Point& x) const;

  // Bounded and periodic with period equal to the grid box (zero counts).
  bool periodic_on(const PeriodicGrid& grid) const;
  RealField sample(const PeriodicGrid& grid, double t = 0.0) const;
  // Largest |d^2 V| over the grid nodes: the sub-quadratic admissibility check.
  double max_second_derivative(const PeriodicGrid& grid) const;

 private:
  Kind kind_ = Kind::zero;
  int dim_ = 1;
  std::vector<double> omega_;
  Vec2 box_{0.0, 0.0};
  TrigSeries series_;
};

class InitialPhaseSpec {
 public:
  enum class Kind { zero, quadratic, sampled };

  static InitialPhaseSpec zero(int dim = 1);
  // phi_0(y) = 1/2 y^T Q y, Q symmetric.
  static InitialPhaseSpec quadratic(int dim, Mat2 q);
  static InitialPhaseSpec sampled(const RealField& phi);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  const Mat2& matrix() const { return q_; }
  Vec2 box() const { return box_; }

  double value(const Point& y) const;
  Vec2 gradient(const Point& y) const;
  Mat2 hessian(const Point& y) const;

  bool periodic_on(const PeriodicGrid& grid) const;
  RealField sample(const PeriodicGrid& grid) const;

 private:
  Kind kind_ = Kind::zero;
  int dim_ = 1;
  Mat2 q_{};
  Vec2 box_{0.0, 0.0};
  TrigSeries series_;
};

}  // namespace wkbnls
