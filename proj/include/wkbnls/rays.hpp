#pragma once

// Rays of geometrical optics for the eikonal equation
//   phi_t + |grad phi|^2 / 2 + V = 0,  phi(0) = phi0,
// obtained from the Hamiltonian flow x' = xi, xi' = -grad V(t, x), together
// with the variational matrices M = d x / d y, Xi = d xi / d y and the action
// S' = |xi|^2 / 2 - V along each ray.

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "wkbnls/errors.hpp"
#include "wkbnls/potential.hpp"
#include "wkbnls/problem.hpp"
#include "wkbnls/spectral.hpp"

namespace wkbnls {

inline constexpr double kDefaultCausticThreshold = 0.1;

struct RayState {
  Point x{};
  Vec2 xi{};
  Mat2 m{};   // d x / d y
  Mat2 dxi{};  // d xi / d y
  double action = 0.0;
};

RayState initial_ray_state(const InitialPhaseSpec& phase, const Point& y);
// One classical RK4 step of the augmented Hamiltonian system.
RayState rk4_ray_step(const PotentialSpec& potential, const RayState& s, double t, double dt);
RayState integrate_ray(const PotentialSpec& potential, RayState s, double t0, double t1, int steps);

class RayBundle {
 public:
  RayBundle(PeriodicGrid markers, PotentialSpec potential, InitialPhaseSpec phase, double dt,
            std::size_t nodes);

  const PeriodicGrid& markers() const { return markers_; }
  int dim() const { return markers_.dim(); }
  std::size_t marker_count() const { return markers_.size(); }
  std::size_t node_count() const { return times_.size(); }
  double dt() const { return dt_; }
  double time(std::size_t node) const { return times_[node]; }
  std::span<const double> times() const { return times_; }
  const PotentialSpec& potential() const { return potential_; }
  const InitialPhaseSpec& phase() const { return phase_; }
  // Marker map commutes with box translations (periodic data).
  bool periodic() const { return periodic_; }

  Point position(std::size_t node, std::size_t marker) const;
  Vec2 momentum(std::size_t node, std::size_t marker) const;
  Mat2 variational(std::size_t node, std::size_t marker) const;
  double jacobian(std::size_t node, std::size_t marker) const { return j_[node * stride() + marker]; }
  double action(std::size_t node, std::size_t marker) const { return s_[node * stride() + marker]; }
  std::span<const double> jacobians(std::size_t node) const;
  std::span<const double> actions(std::size_t node) const;

  // First time with min J <= kDefaultCausticThreshold; +inf if none was stored.
  double caustic_horizon() const { return horizon_; }
  // Stored node matching t; throws if t is not on the time grid.
  std::size_t node_at(double t) const;

  void store(std::size_t node, std::size_t marker, const RayState& s);
  void finalize();

 private:
  std::size_t stride() const { return markers_.size(); }

  PeriodicGrid markers_;
  PotentialSpec potential_;
  InitialPhaseSpec phase_;
  double dt_;
  bool periodic_;
  std::vector<double> times_;
  std::vector<double> x_, xi_, m_, j_, s_;
  double horizon_ = 0.0;
};

RayBundle integrate_flow(const PotentialSpec& potential, const InitialPhaseSpec& phase,
                         const PeriodicGrid& markers, double t_final, double dt);
RayBundle integrate_flow(const SemiclassicalProblem& problem, const PeriodicGrid& markers,
                         double t_final, double dt);

// Earliest stored time with min_y J_t(y) <= threshold, linearly refined between nodes.
std::optional<double> caustic_time(const RayBundle& bundle, double threshold);

struct LagrangianLabels {
  PeriodicGrid grid;  // Eulerian grid the labels belong to
  std::size_t node;
  double time;
  std::vector<Point> y;  // y(t, x) per Eulerian node
  double worst_residual;
};

// Labels y with x(t, y) = x for every node x of x_grid.
LagrangianLabels invert_flow(const RayBundle& bundle, double t, const PeriodicGrid& x_grid);

// Interpolate a per-marker scalar (J_t, along-ray integrals, ...) at arbitrary labels.
std::vector<double> interpolate_marker_values(const RayBundle& bundle, std::span<const double> values,
                                              std::span<const Point> labels);

// phi_eik(t, x) = S(t, y(t, x)).
RealField eikonal_phase(const RayBundle& bundle, double t, const PeriodicGrid& x_grid);
RealField eikonal_phase(const RayBundle& bundle, const LagrangianLabels& labels);

enum class SpatialDerivative { spectral, finite_difference };

// sup_x |phi_t + |grad phi|^2/2 + V| at a stored node; phi_t from the 7-point
// centred stencil in time, grad phi spectrally or by 4th-order differences
// (interior nodes only) for fields that are not periodic on the box.
double hamilton_jacobi_residual(const RayBundle& bundle, const PeriodicGrid& x_grid, std::size_t node,
                                SpatialDerivative mode);

// Columns t, y, x, xi, J, S (per axis for 2D); every `node_stride`-th node.
void write_bundle_csv(const RayBundle& bundle, std::ostream& out, std::size_t node_stride = 1);

}  // namespace wkbnls
