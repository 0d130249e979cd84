#include "wkbnls/rays.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace wkbnls {

// ---------------------------------------------------------------------------
// Single-ray integration

RayState initial_ray_state(const InitialPhaseSpec& phase, const Point& y) {
  RayState s;
  s.x = y;
  s.xi = phase.gradient(y);
  s.m = {{{1.0, 0.0}, {0.0, 1.0}}};
  s.dxi = phase.hessian(y);
  s.action = phase.value(y);
  return s;
}

namespace {

RayState ray_rhs(const PotentialSpec& potential, const RayState& s, double t) {
  const int dim = potential.dim();
  const Vec2 grad = potential.gradient(t, s.x);
  const Mat2 hess = potential.hessian(t, s.x);
  RayState d;
  for (int a = 0; a < dim; ++a) {
    d.x[a] = s.xi[a];
    d.xi[a] = -grad[a];
    for (int b = 0; b < dim; ++b) {
      d.m[a][b] = s.dxi[a][b];
      double acc = 0.0;
      for (int c = 0; c < dim; ++c) acc += hess[a][c] * s.m[c][b];
      d.dxi[a][b] = -acc;
    }
  }
  double kinetic = 0.0;
  for (int a = 0; a < dim; ++a) kinetic += s.xi[a] * s.xi[a];
  d.action = 0.5 * kinetic - potential.value(t, s.x);
  return d;
}

RayState axpy(const RayState& s, double h, const RayState& d) {
  RayState r;
  for (int a = 0; a < 2; ++a) {
    r.x[a] = s.x[a] + h * d.x[a];
    r.xi[a] = s.xi[a] + h * d.xi[a];
    for (int b = 0; b < 2; ++b) {
      r.m[a][b] = s.m[a][b] + h * d.m[a][b];
      r.dxi[a][b] = s.dxi[a][b] + h * d.dxi[a][b];
    }
  }
  r.action = s.action + h * d.action;
  return r;
}

bool finite_state(const RayState& s) {
  bool ok = std::isfinite(s.action);
  for (int a = 0; a < 2; ++a) {
    ok = ok && std::isfinite(s.x[a]) && std::isfinite(s.xi[a]);
    for (int b = 0; b < 2; ++b) ok = ok && std::isfinite(s.m[a][b]) && std::isfinite(s.dxi[a][b]);
  }
  return ok;
}

double det(const Mat2& m, int dim) { return dim == 1 ? m[0][0] : m[0][0] * m[1][1] - m[0][1] * m[1][0]; }

}  // namespace

RayState rk4_ray_step(const PotentialSpec& potential, const RayState& s, double t, double dt) {
  const RayState k1 = ray_rhs(potential, s, t);
  const RayState k2 = ray_rhs(potential, axpy(s, 0.5 * dt, k1), t + 0.5 * dt);
  const RayState k3 = ray_rhs(potential, axpy(s, 0.5 * dt, k2), t + 0.5 * dt);
  const RayState k4 = ray_rhs(potential, axpy(s, dt, k3), t + dt);
  RayState r = s;
  r = axpy(r, dt / 6.0, k1);
  r = axpy(r, dt / 3.0, k2);
  r = axpy(r, dt / 3.0, k3);
  r = axpy(r, dt / 6.0, k4);
  return r;
}

RayState integrate_ray(const PotentialSpec& potential, RayState s, double t0, double t1, int steps) {
  if (steps < 1) throw std::invalid_argument("integrate_ray: steps must be positive");
  const double dt = (t1 - t0) / steps;
  for (int n = 0; n < steps; ++n) {
    s = rk4_ray_step(potential, s, t0 + n * dt, dt);
    if (!finite_state(s)) throw NonFiniteState("integrate_ray", t0 + (n + 1) * dt);
  }
  return s;
}

// ---------------------------------------------------------------------------
// RayBundle

RayBundle::RayBundle(PeriodicGrid markers, PotentialSpec potential, InitialPhaseSpec phase, double dt,
                     std::size_t nodes)
    : markers_(std::move(markers)),
      potential_(std::move(potential)),
      phase_(std::move(phase)),
      dt_(dt),
      periodic_(potential_.periodic_on(markers_) && phase_.periodic_on(markers_)) {
  const std::size_t n = markers_.size();
  const std::size_t d = static_cast<std::size_t>(markers_.dim());
  times_.resize(nodes);
  for (std::size_t i = 0; i < nodes; ++i) times_[i] = static_cast<double>(i) * dt_;
  x_.assign(nodes * n * d, 0.0);
  xi_.assign(nodes * n * d, 0.0);
  m_.assign(nodes * n * d * d, 0.0);
  j_.assign(nodes * n, 0.0);
  s_.assign(nodes * n, 0.0);
}

void RayBundle::store(std::size_t node, std::size_t marker, const RayState& s) {
  const std::size_t d = static_cast<std::size_t>(dim());
  const std::size_t base = node * stride() + marker;
  for (std::size_t a = 0; a < d; ++a) {
    x_[base * d + a] = s.x[a];
    xi_[base * d + a] = s.xi[a];
    for (std::size_t b = 0; b < d; ++b) m_[(base * d + a) * d + b] = s.m[a][b];
  }
  j_[base] = det(s.m, dim());
  s_[base] = s.action;
}

Point RayBundle::position(std::size_t node, std::size_t marker) const {
  const std::size_t d = static_cast<std::size_t>(dim());
  const std::size_t base = (node * stride() + marker) * d;
  return {x_[base], d == 2 ? x_[base + 1] : 0.0};
}

Vec2 RayBundle::momentum(std::size_t node, std::size_t marker) const {
  const std::size_t d = static_cast<std::size_t>(dim());
  const std::size_t base = (node * stride() + marker) * d;
  return {xi_[base], d == 2 ? xi_[base + 1] : 0.0};
}

Mat2 RayBundle::variational(std::size_t node, std::size_t marker) const {
  const std::size_t d = static_cast<std::size_t>(dim());
  const std::size_t base = (node * stride() + marker) * d * d;
  Mat2 m{};
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) m[a][b] = m_[base + a * d + b];
  return m;
}

std::span<const double> RayBundle::jacobians(std::size_t node) const {
  return std::span<const double>(j_).subspan(node * stride(), stride());
}

std::span<const double> RayBundle::actions(std::size_t node) const {
  return std::span<const double>(s_).subspan(node * stride(), stride());
}

void RayBundle::finalize() {
  auto t = caustic_time(*this, kDefaultCausticThreshold);
  horizon_ = t ? *t : std::numeric_limits<double>::infinity();
}

std::size_t RayBundle::node_at(double t) const {
  const double idx = std::round(t / dt_);
  if (idx < 0 || idx >= static_cast<double>(times_.size()) ||
      std::abs(idx * dt_ - t) > 1e-9 * std::max(dt_, std::abs(t))) {
    std::ostringstream os;
    os << "time " << t << " is not a stored node of the ray bundle (dt = " << dt_ << ", last = "
       << times_.back() << ")";
    throw std::invalid_argument(os.str());
  }
  return static_cast<std::size_t>(idx);
}

RayBundle integrate_flow(const PotentialSpec& potential, const InitialPhaseSpec& phase,
                         const PeriodicGrid& markers, double t_final, double dt) {
  if (!(dt > 0.0) || !(t_final > 0.0)) {
    throw std::invalid_argument("integrate_flow: dt and t_final must be positive");
  }
  if (potential.dim() != markers.dim() || phase.dim() != markers.dim()) {
    throw std::invalid_argument("integrate_flow: dimension mismatch");
  }
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::round(t_final / dt)));
  const double h = t_final / static_cast<double>(steps);
  RayBundle bundle(markers, potential, phase, h, steps + 1);
  for (std::size_t i = 0; i < markers.size(); ++i) {
    RayState s = initial_ray_state(phase, markers.node(i));
    bundle.store(0, i, s);
    for (std::size_t n = 0; n < steps; ++n) {
      s = rk4_ray_step(potential, s, static_cast<double>(n) * h, h);
      if (!finite_state(s)) throw NonFiniteState("integrate_flow", static_cast<double>(n + 1) * h);
      bundle.store(n + 1, i, s);
    }
  }
  bundle.finalize();
  return bundle;
}

RayBundle integrate_flow(const SemiclassicalProblem& problem, const PeriodicGrid& markers,
                         double t_final, double dt) {
  return integrate_flow(problem.potential(), problem.phase(), markers, t_final, dt);
}

std::optional<double> caustic_time(const RayBundle& bundle, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("caustic_time: threshold must lie in (0, 1)");
  }
  double prev = 0.0;
  for (std::size_t node = 0; node < bundle.node_count(); ++node) {
    const auto js = bundle.jacobians(node);
    const double jmin = *std::min_element(js.begin(), js.end());
    if (jmin <= threshold) {
      if (node == 0) return 0.0;
      const double frac = (prev - threshold) / (prev - jmin);
      return bundle.time(node - 1) + frac * bundle.dt();
    }
    prev = jmin;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Interpolation of marker data

namespace {

struct Wrapped {
  std::size_t r;
  long q;
};

Wrapped wrap(long i, int n) {
  long q = i >= 0 ? i / n : -((-i + n - 1) / n);
  return {static_cast<std::size_t>(i - q * n), q};
}

// 4-point Lagrange stencil along one axis of the marker grid.
struct Stencil {
  long start;
  std::array<double, 4> w;
};

Stencil lagrange_stencil(const RayBundle& b, int axis, double y) {
  const PeriodicGrid& g = b.markers();
  const double h = g.spacing(axis);
  const double y0 = g.coordinate(axis, 0);
  const int n = g.points(axis);
  const double u_global = (y - y0) / h;
  long start = static_cast<long>(std::floor(u_global)) - 1;
  if (!b.periodic()) {
    const double slack = 1e-9;
    if (u_global < -slack || u_global > (n - 1) + slack) {
      std::ostringstream os;
      os << "label " << y << " lies outside the marker range on axis " << axis;
      throw InversionFailure(os.str(), std::numeric_limits<double>::infinity());
    }
    start = std::clamp<long>(start, 0, n - 4);
  }
  const double u = u_global - static_cast<double>(start);
  Stencil s{start, {}};
  for (int j = 0; j < 4; ++j) {
    double w = 1.0;
    for (int l = 0; l < 4; ++l) {
      if (l != j) w *= (u - l) / static_cast<double>(j - l);
    }
    s.w[j] = w;
  }
  return s;
}

// Value at extended marker index (i0, i1); `shift` adds the box translation
// for positions along the given axis (-1 for none).
template <class Getter>
double extended(const RayBundle& b, long i0, long i1, Getter get, int shift_axis) {
  const PeriodicGrid& g = b.markers();
  const Wrapped w0 = wrap(i0, g.points(0));
  Wrapped w1{0, 0};
  if (g.dim() == 2) w1 = wrap(i1, g.points(1));
  const std::size_t flat = g.dim() == 2 ? g.index(static_cast<int>(w0.r), static_cast<int>(w1.r)) : w0.r;
  double v = get(flat);
  if (shift_axis == 0) v += static_cast<double>(w0.q) * g.extent(0);
  if (shift_axis == 1) v += static_cast<double>(w1.q) * g.extent(1);
  return v;
}

template <class Getter>
double lagrange_eval(const RayBundle& b, const Point& y, Getter get, int shift_axis) {
  const Stencil s0 = lagrange_stencil(b, 0, y[0]);
  if (b.dim() == 1) {
    double v = 0.0;
    for (int j = 0; j < 4; ++j) v += s0.w[j] * extended(b, s0.start + j, 0, get, shift_axis);
    return v;
  }
  const Stencil s1 = lagrange_stencil(b, 1, y[1]);
  double v = 0.0;
  for (int j0 = 0; j0 < 4; ++j0) {
    double row = 0.0;
    for (int j1 = 0; j1 < 4; ++j1) row += s1.w[j1] * extended(b, s0.start + j0, s1.start + j1, get, shift_axis);
    v += s0.w[j0] * row;
  }
  return v;
}

// Cubic Hermite data on a 1D marker interval.
struct Hermite {
  double y0, h, f0, d0, f1, d1;
  double value(double tau) const {
    const double t2 = tau * tau, t3 = t2 * tau;
    return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + tau) * h * d0 + (-2 * t3 + 3 * t2) * f1 +
           (t3 - t2) * h * d1;
  }
  double slope(double tau) const {
    const double t2 = tau * tau;
    return (6 * t2 - 6 * tau) / h * f0 + (3 * t2 - 4 * tau + 1) * d0 + (-6 * t2 + 6 * tau) / h * f1 +
           (3 * t2 - 2 * tau) * d1;
  }
};

class MarkerMap1D {
 public:
  MarkerMap1D(const RayBundle& b, std::size_t node) : b_(b), node_(node) {}

  double y(long i) const { return b_.markers().coordinate(0, 0) + static_cast<double>(i) * b_.markers().spacing(0); }
  double x(long i) const {
    return extended(b_, i, 0, [&](std::size_t f) { return b_.position(node_, f)[0]; }, 0);
  }
  double m(long i) const {
    return extended(b_, i, 0, [&](std::size_t f) { return b_.variational(node_, f)[0][0]; }, -1);
  }
  double s(long i) const {
    return extended(b_, i, 0, [&](std::size_t f) { return b_.action(node_, f); }, -1);
  }
  double ds(long i) const {
    return extended(b_, i, 0,
                    [&](std::size_t f) { return b_.momentum(node_, f)[0] * b_.variational(node_, f)[0][0]; },
                    -1);
  }

  Hermite position_on(long i) const {
    const double h = b_.markers().spacing(0);
    return {y(i), h, x(i), m(i), x(i + 1), m(i + 1)};
  }
  Hermite action_on(long i) const {
    const double h = b_.markers().spacing(0);
    return {y(i), h, s(i), ds(i), s(i + 1), ds(i + 1)};
  }

  // Interval index containing label y (extended for periodic bundles).
  std::pair<long, double> locate(double yy) const {
    const double h = b_.markers().spacing(0);
    const double u = (yy - y(0)) / h;
    long i = static_cast<long>(std::floor(u));
    if (!b_.periodic()) {
      const int n = b_.markers().points(0);
      if (u < -1e-9 || u > (n - 1) + 1e-9) {
        throw InversionFailure("label outside the marker range", std::numeric_limits<double>::infinity());
      }
      i = std::clamp<long>(i, 0, n - 2);
    }
    return {i, u - static_cast<double>(i)};
  }

  // Solve x(y) = target by bracketing then safeguarded Newton on the Hermite map.
  std::pair<double, double> invert(double target) const {
    const int n = b_.markers().points(0);
    long lo_idx = 0, hi_idx = n - 1;
    double t = target;
    long offset = 0;
    if (b_.periodic()) {
      const double period = b_.markers().extent(0);
      offset = static_cast<long>(std::floor((target - x(0)) / period));
      t = target - static_cast<double>(offset) * period;
      hi_idx = n;
    } else if (target < x(0) || target > x(n - 1)) {
      std::ostringstream os;
      os << "x = " << target << " lies outside the image [" << x(0) << ", " << x(n - 1)
         << "] of the marker range";
      throw InversionFailure(os.str(), std::numeric_limits<double>::infinity());
    }
    while (hi_idx - lo_idx > 1) {
      const long mid = (lo_idx + hi_idx) / 2;
      if (x(mid) <= t) lo_idx = mid; else hi_idx = mid;
    }
    const Hermite p = position_on(lo_idx);
    double a = 0.0, c = 1.0;
    const double fa = p.f0 - t;
    const double span = p.f1 - p.f0;
    double tau = span > 0.0 ? std::clamp(-fa / span, 0.0, 1.0) : 0.5;
    double f = p.value(tau) - t;
    for (int it = 0; it < 100 && std::abs(f) > 1e-14 * (1.0 + std::abs(t)); ++it) {
      if (f < 0.0) a = tau; else c = tau;
      const double d = p.slope(tau) * p.h;
      double next = d > 0.0 ? tau - f / d : -1.0;
      if (!(next > a && next < c)) next = 0.5 * (a + c);
      tau = next;
      f = p.value(tau) - t;
      if (c - a < 1e-16) break;
    }
    const double label = p.y0 + tau * p.h + static_cast<double>(offset) * b_.markers().extent(0);
    return {label, std::abs(f)};
  }

 private:
  const RayBundle& b_;
  std::size_t node_;
};

void check_horizon(const RayBundle& bundle, double t) {
  if (t >= bundle.caustic_horizon()) throw CausticCrossed(t, bundle.caustic_horizon());
}

std::pair<Point, Mat2> map_and_jacobian_2d(const RayBundle& b, std::size_t node, const Point& y) {
  Point x{};
  Mat2 m{};
  for (int a = 0; a < 2; ++a) {
    x[a] = lagrange_eval(b, y, [&](std::size_t f) { return b.position(node, f)[a]; }, a);
    for (int c = 0; c < 2; ++c) {
      m[a][c] = lagrange_eval(b, y, [&](std::size_t f) { return b.variational(node, f)[a][c]; }, -1);
    }
  }
  return {x, m};
}

}  // namespace

std::vector<double> interpolate_marker_values(const RayBundle& bundle, std::span<const double> values,
                                              std::span<const Point> labels) {
  if (values.size() != bundle.marker_count()) {
    throw std::invalid_argument("interpolate_marker_values: one value per marker expected");
  }
  std::vector<double> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out[i] = lagrange_eval(bundle, labels[i], [&](std::size_t f) { return values[f]; }, -1);
  }
  return out;
}

LagrangianLabels invert_flow(const RayBundle& bundle, double t, const PeriodicGrid& x_grid) {
  if (x_grid.dim() != bundle.dim()) throw std::invalid_argument("invert_flow: dimension mismatch");
  check_horizon(bundle, t);
  const std::size_t node = bundle.node_at(t);
  LagrangianLabels out{x_grid, node, bundle.time(node), std::vector<Point>(x_grid.size()), 0.0};

  if (bundle.dim() == 1) {
    MarkerMap1D map(bundle, node);
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
      auto [y, res] = map.invert(x_grid.node(i)[0]);
      out.y[i] = {y, 0.0};
      out.worst_residual = std::max(out.worst_residual, res);
    }
  } else {
    // Continuation in time from the identity map at t = 0.
    const std::size_t stride = std::max<std::size_t>(1, node / 16);
    std::vector<std::size_t> path;
    for (std::size_t k = stride; k < node; k += stride) path.push_back(k);
    path.push_back(node);
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
      const Point target = x_grid.node(i);
      Point y = target;
      double res = 0.0;
      for (std::size_t k : path) {
        if (k == 0) continue;
        for (int it = 0; it < 50; ++it) {
          auto [x, m] = map_and_jacobian_2d(bundle, k, y);
          const double r0 = x[0] - target[0], r1 = x[1] - target[1];
          res = std::hypot(r0, r1);
          if (res <= 1e-13 * (1.0 + std::hypot(target[0], target[1]))) break;
          const double d = m[0][0] * m[1][1] - m[0][1] * m[1][0];
          y[0] -= (m[1][1] * r0 - m[0][1] * r1) / d;
          y[1] -= (-m[1][0] * r0 + m[0][0] * r1) / d;
        }
      }
      out.y[i] = y;
      out.worst_residual = std::max(out.worst_residual, res);
    }
  }
  if (!(out.worst_residual <= 1e-10)) {
    std::ostringstream os;
    os << "invert_flow: Newton did not converge, worst residual " << out.worst_residual;
    throw InversionFailure(os.str(), out.worst_residual);
  }
  return out;
}

RealField eikonal_phase(const RayBundle& bundle, const LagrangianLabels& labels) {
  std::vector<double> phi(labels.y.size());
  if (bundle.dim() == 1) {
    MarkerMap1D map(bundle, labels.node);
    for (std::size_t i = 0; i < phi.size(); ++i) {
      auto [idx, tau] = map.locate(labels.y[i][0]);
      phi[i] = map.action_on(idx).value(tau);
    }
  } else {
    for (std::size_t i = 0; i < phi.size(); ++i) {
      phi[i] = lagrange_eval(bundle, labels.y[i], [&](std::size_t f) { return bundle.action(labels.node, f); }, -1);
    }
  }
  return RealField(labels.grid, std::move(phi), "phi_eik");
}

RealField eikonal_phase(const RayBundle& bundle, double t, const PeriodicGrid& x_grid) {
  return eikonal_phase(bundle, invert_flow(bundle, t, x_grid));
}

double hamilton_jacobi_residual(const RayBundle& bundle, const PeriodicGrid& x_grid, std::size_t node,
                                SpatialDerivative mode) {
  if (node < 3 || node + 3 >= bundle.node_count()) {
    throw std::invalid_argument("hamilton_jacobi_residual: node needs three neighbours on each side");
  }
  const double h = bundle.dt();
  std::vector<RealField> phi;
  for (int k = -3; k <= 3; ++k) phi.push_back(eikonal_phase(bundle, bundle.time(node + k), x_grid));
  static constexpr std::array<double, 7> c{-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0};

  const RealField& f = phi[3];
  const int dim = x_grid.dim();
  std::vector<std::vector<double>> grad(dim, std::vector<double>(f.size(), 0.0));
  std::vector<char> interior(f.size(), 1);
  for (int a = 0; a < dim; ++a) {
    if (mode == SpatialDerivative::spectral) {
      const RealField d = spectral_derivative(f, a, 1);
      grad[a].assign(d.values().begin(), d.values().end());
    } else {
      const int n = x_grid.points(a);
      const double dx = x_grid.spacing(a);
      for (std::size_t flat = 0; flat < f.size(); ++flat) {
        const int i0 = dim == 2 ? static_cast<int>(flat / x_grid.points(1)) : static_cast<int>(flat);
        const int i1 = dim == 2 ? static_cast<int>(flat % x_grid.points(1)) : 0;
        const int i = a == 0 ? i0 : i1;
        if (i < 2 || i > n - 3) {
          interior[flat] = 0;
          continue;
        }
        auto at = [&](int off) {
          return a == 0 ? f[x_grid.index(i0 + off, i1)] : f[x_grid.index(i0, i1 + off)];
        };
        grad[a][flat] = (at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2)) / (12.0 * dx);
      }
    }
  }
  double worst = 0.0;
  const double t = bundle.time(node);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!interior[i]) continue;
    double dt_phi = 0.0;
    for (int k = 0; k < 7; ++k) dt_phi += c[k] * phi[k][i];
    dt_phi /= 60.0 * h;
    double g2 = 0.0;
    for (int a = 0; a < dim; ++a) g2 += grad[a][i] * grad[a][i];
    const double r = dt_phi + 0.5 * g2 + bundle.potential().value(t, x_grid.node(i));
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

void write_bundle_csv(const RayBundle& bundle, std::ostream& out, std::size_t node_stride) {
  if (node_stride == 0) node_stride = 1;
  out.precision(17);
  if (bundle.dim() == 1) {
    out << "t,y,x,xi,J,S\n";
  } else {
    out << "t,y0,y1,x0,x1,xi0,xi1,J,S\n";
  }
  for (std::size_t n = 0; n < bundle.node_count(); n += node_stride) {
    for (std::size_t i = 0; i < bundle.marker_count(); ++i) {
      const Point y = bundle.markers().node(i);
      const Point x = bundle.position(n, i);
      const Vec2 xi = bundle.momentum(n, i);
      out << bundle.time(n);
      if (bundle.dim() == 1) {
        out << ',' << y[0] << ',' << x[0] << ',' << xi[0];
      } else {
        out << ',' << y[0] << ',' << y[1] << ',' << x[0] << ',' << x[1] << ',' << xi[0] << ',' << xi[1];
      }
      out << ',' << bundle.jacobian(n, i) << ',' << bundle.action(n, i) << '\n';
    }
  }
}

}  // namespace wkbnls
