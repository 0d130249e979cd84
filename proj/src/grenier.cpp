#include "wkbnls/grenier.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "wkbnls/errors.hpp"

namespace wkbnls {

const char* to_string(GrenierVariant v) {
  switch (v) {
    case GrenierVariant::full: return "full";
    case GrenierVariant::skew_free: return "skew_free";
    case GrenierVariant::limit: return "limit";
    case GrenierVariant::corrector: return "corrector";
  }
  return "?";
}

namespace {

using Buffer = std::vector<cplx>;

std::size_t find_time(const std::vector<double>& times, double t, double spacing) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (std::abs(times[i] - t) <= 1e-9 * std::max(std::abs(spacing), std::abs(t))) return i;
  }
  std::ostringstream os;
  os << "no stored state at t = " << t;
  throw std::invalid_argument(os.str());
}

class Calculus {
 public:
  explicit Calculus(const PeriodicGrid& g) : ops(g), dim(g.dim()), n(g.size()) {}

  std::array<Buffer, 2> grad(const Buffer& f) const {
    std::array<Buffer, 2> g;
    for (int a = 0; a < dim; ++a) ops.derivative(f, g[a], a, 1);
    return g;
  }
  Buffer lap(const Buffer& f) const {
    Buffer out;
    ops.laplacian(f, out);
    return out;
  }
  void dealias_real(Buffer& f) const {
    ops.dealias(f);
    for (auto& z : f) z = cplx(z.real(), 0.0);
  }

  SpectralOps ops;
  int dim;
  std::size_t n;
};

struct PhaseAmp {
  Buffer phi, a;
};

PhaseAmp axpy(const PhaseAmp& s, double h, const PhaseAmp& d) {
  PhaseAmp r = s;
  for (std::size_t i = 0; i < r.phi.size(); ++i) {
    r.phi[i] += h * d.phi[i];
    r.a[i] += h * d.a[i];
  }
  return r;
}

PhaseAmp transport_rhs(const Calculus& c, const PhaseAmp& s, const std::vector<double>& v) {
  const auto gphi = c.grad(s.phi);
  const auto ga = c.grad(s.a);
  const Buffer lphi = c.lap(s.phi);
  PhaseAmp d{Buffer(c.n), Buffer(c.n)};
  for (std::size_t i = 0; i < c.n; ++i) {
    double g2 = 0.0;
    cplx adv{};
    for (int ax = 0; ax < c.dim; ++ax) {
      g2 += gphi[ax][i].real() * gphi[ax][i].real();
      adv += gphi[ax][i].real() * ga[ax][i];
    }
    d.phi[i] = -0.5 * g2 - v[i] - std::norm(s.a[i]);
    d.a[i] = -adv - 0.5 * s.a[i] * lphi[i].real();
  }
  c.dealias_real(d.phi);
  c.ops.dealias(d.a);
  return d;
}

PhaseAmp rk4(const Calculus& c, const PhaseAmp& s, double h, const std::vector<double>& v) {
  const PhaseAmp k1 = transport_rhs(c, s, v);
  const PhaseAmp k2 = transport_rhs(c, axpy(s, 0.5 * h, k1), v);
  const PhaseAmp k3 = transport_rhs(c, axpy(s, 0.5 * h, k2), v);
  const PhaseAmp k4 = transport_rhs(c, axpy(s, h, k3), v);
  PhaseAmp r = s;
  for (std::size_t i = 0; i < r.phi.size(); ++i) {
    r.phi[i] += h / 6.0 * (k1.phi[i] + 2.0 * k2.phi[i] + 2.0 * k3.phi[i] + k4.phi[i]);
    r.a[i] += h / 6.0 * (k1.a[i] + 2.0 * k2.a[i] + 2.0 * k3.a[i] + k4.a[i]);
  }
  for (auto& z : r.phi) z = cplx(z.real(), 0.0);
  return r;
}

bool finite(const Buffer& b) {
  for (const auto& z : b) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

GrenierState make_state(const Calculus& c, const PeriodicGrid& grid, double t, const PhaseAmp& s) {
  std::vector<double> phi(c.n);
  for (std::size_t i = 0; i < c.n; ++i) phi[i] = s.phi[i].real();
  GrenierState st{t, ComplexField(grid, s.a, "a"), RealField(grid, std::move(phi), "phi"), {}};
  const auto g = c.grad(s.phi);
  for (int ax = 0; ax < c.dim; ++ax) {
    std::vector<double> v(c.n);
    for (std::size_t i = 0; i < c.n; ++i) v[i] = g[ax][i].real();
    st.v.emplace_back(grid, std::move(v), "v");
  }
  return st;
}

}  // namespace

const GrenierState& GrenierTrajectory::at(double t) const {
  std::vector<double> times;
  for (const auto& s : states) times.push_back(s.t);
  return states[find_time(times, t, output_dt)];
}

const CorrectorState& CorrectorTrajectory::at(double t) const {
  std::vector<double> times;
  for (const auto& s : states) times.push_back(s.t);
  return states[find_time(times, t, dt)];
}

GrenierTrajectory solve_phase_amplitude(const SemiclassicalProblem& problem, double t_final, double dt,
                                        GrenierVariant variant, int output_every) {
  if (problem.kappa() != 0) throw std::invalid_argument("solve_phase_amplitude: requires kappa = 0");
  if (variant == GrenierVariant::corrector) {
    throw std::invalid_argument("solve_phase_amplitude: use solve_corrector for the corrector system");
  }
  if (!(dt > 0.0) || !std::isfinite(t_final) || output_every < 1) {
    throw std::invalid_argument("solve_phase_amplitude: dt must be positive and output_every >= 1");
  }
  const PeriodicGrid& grid = problem.grid();
  if (!problem.potential().periodic_on(grid)) {
    throw std::invalid_argument(
        "solve_phase_amplitude: the potential must be zero or bounded periodic on the computational box");
  }
  if (!problem.phase().periodic_on(grid)) {
    throw std::invalid_argument("solve_phase_amplitude: the initial phase must be periodic on the box");
  }

  const Calculus c(grid);
  const double eps = variant == GrenierVariant::limit ? 0.0 : problem.epsilon();
  const RealField vfield = problem.potential().sample(grid);
  const std::vector<double> v(vfield.values().begin(), vfield.values().end());

  const long steps = std::max(1L, std::lround(std::abs(t_final) / dt));
  const double h = t_final / static_cast<double>(steps);
  if (steps % output_every != 0) {
    throw std::invalid_argument("solve_phase_amplitude: step count must be a multiple of output_every");
  }

  PhaseAmp s;
  const ComplexField a0 = variant == GrenierVariant::limit ? problem.a0() : problem.initial_amplitude();
  s.a.assign(a0.values().begin(), a0.values().end());
  const RealField phi0 = problem.phase().sample(grid);
  s.phi.resize(c.n);
  for (std::size_t i = 0; i < c.n; ++i) s.phi[i] = phi0[i];

  GrenierTrajectory traj{variant, eps, h, h * output_every, grid, vfield, {}, 0.0, false};
  auto record = [&](double t) {
    const double frac = c.ops.upper_third_fraction(s.a);
    traj.max_upper_fraction = std::max(traj.max_upper_fraction, frac);
    if (frac > kResolutionAlarm) traj.resolution_alarm = true;
    traj.states.push_back(make_state(c, grid, t, s));
  };
  record(0.0);
  for (long n = 0; n < steps; ++n) {
    if (variant == GrenierVariant::full) c.ops.apply_free_propagator(s.a, 0.25 * eps * h);
    s = rk4(c, s, h, v);
    if (variant == GrenierVariant::full) c.ops.apply_free_propagator(s.a, 0.25 * eps * h);
    const double t = static_cast<double>(n + 1) * h;
    if (!finite(s.a) || !finite(s.phi)) throw NonFiniteState("solve_phase_amplitude", t);
    if ((n + 1) % output_every == 0) record(t);
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Corrector

namespace {

struct Background {
  Buffer a;
  std::array<Buffer, 2> gphi, ga;
  Buffer lphi, lapa;
};

Background background(const Calculus& c, const GrenierState& s) {
  Background b;
  b.a.assign(s.a.values().begin(), s.a.values().end());
  Buffer phi(s.phi.values().begin(), s.phi.values().end());
  b.gphi = c.grad(phi);
  b.ga = c.grad(b.a);
  b.lphi = c.lap(phi);
  b.lapa = c.lap(b.a);
  return b;
}

PhaseAmp corrector_rhs(const Calculus& c, const PhaseAmp& s, const Background& b) {
  const auto gp1 = c.grad(s.phi);
  const auto ga1 = c.grad(s.a);
  const Buffer lp1 = c.lap(s.phi);
  PhaseAmp d{Buffer(c.n), Buffer(c.n)};
  const cplx half_i(0.0, 0.5);
  for (std::size_t i = 0; i < c.n; ++i) {
    double dot_pp = 0.0;
    cplx adv{};
    for (int ax = 0; ax < c.dim; ++ax) {
      dot_pp += b.gphi[ax][i].real() * gp1[ax][i].real();
      adv += b.gphi[ax][i].real() * ga1[ax][i] + gp1[ax][i].real() * b.ga[ax][i];
    }
    d.phi[i] = -dot_pp - 2.0 * (std::conj(b.a[i]) * s.a[i]).real();
    d.a[i] = -adv - 0.5 * s.a[i] * b.lphi[i].real() - 0.5 * b.a[i] * lp1[i].real() + half_i * b.lapa[i];
  }
  c.dealias_real(d.phi);
  c.ops.dealias(d.a);
  return d;
}

}  // namespace

CorrectorTrajectory solve_corrector(const GrenierTrajectory& limit, const ComplexField& a1, double dt) {
  if (limit.variant != GrenierVariant::limit) {
    throw std::invalid_argument("solve_corrector: expects a trajectory of the limit system");
  }
  if (!(a1.grid() == limit.grid)) throw std::invalid_argument("solve_corrector: a1 is on a different grid");
  const double h = limit.output_dt;
  const double ratio = dt / h;
  const long two_m = std::lround(ratio);
  if (!(dt != 0.0) || two_m < 2 || two_m % 2 != 0 || std::abs(ratio - two_m) > 1e-9 * std::abs(ratio)) {
    std::ostringstream os;
    os << "solve_corrector: time grid mismatch, dt = " << dt << " must be an even multiple of the limit "
       << "output spacing " << h;
    throw std::invalid_argument(os.str());
  }
  const std::size_t m = static_cast<std::size_t>(two_m / 2);
  const std::size_t steps = (limit.states.size() - 1) / (2 * m);
  if (steps == 0) throw std::invalid_argument("solve_corrector: limit trajectory shorter than one step");
  for (std::size_t i = 0; i < limit.states.size(); ++i) {
    if (std::abs(limit.states[i].t - static_cast<double>(i) * h) > 1e-9 * std::abs(h) * (i + 1)) {
      throw std::invalid_argument("solve_corrector: limit states are not uniformly spaced from t = 0");
    }
  }

  const Calculus c(limit.grid);
  PhaseAmp s{Buffer(c.n), Buffer(a1.values().begin(), a1.values().end())};
  CorrectorTrajectory out{dt, {}};
  auto record = [&](double t) {
    std::vector<double> phi(c.n);
    for (std::size_t i = 0; i < c.n; ++i) phi[i] = s.phi[i].real();
    out.states.push_back({t, ComplexField(limit.grid, s.a, "a1"), RealField(limit.grid, std::move(phi), "phi1")});
  };
  record(0.0);
  Background b0 = background(c, limit.states[0]);
  for (std::size_t n = 0; n < steps; ++n) {
    const Background bm = background(c, limit.states[(2 * n + 1) * m]);
    const Background b1 = background(c, limit.states[(2 * n + 2) * m]);
    const PhaseAmp k1 = corrector_rhs(c, s, b0);
    const PhaseAmp k2 = corrector_rhs(c, axpy(s, 0.5 * dt, k1), bm);
    const PhaseAmp k3 = corrector_rhs(c, axpy(s, 0.5 * dt, k2), bm);
    const PhaseAmp k4 = corrector_rhs(c, axpy(s, dt, k3), b1);
    for (std::size_t i = 0; i < c.n; ++i) {
      s.phi[i] += dt / 6.0 * (k1.phi[i] + 2.0 * k2.phi[i] + 2.0 * k3.phi[i] + k4.phi[i]);
      s.a[i] += dt / 6.0 * (k1.a[i] + 2.0 * k2.a[i] + 2.0 * k3.a[i] + k4.a[i]);
    }
    for (auto& z : s.phi) z = cplx(z.real(), 0.0);
    const double t = static_cast<double>(n + 1) * dt;
    if (!finite(s.a) || !finite(s.phi)) throw NonFiniteState("solve_corrector", t);
    record(t);
    b0 = b1;
  }
  return out;
}

ComplexField assemble_supercritical(const GrenierState& state, double eps,
                                    const std::optional<CorrectorState>& corrector) {
  if (!(eps > 0.0)) throw std::invalid_argument("assemble_supercritical: eps must be positive");
  if (corrector && !(corrector->a1.grid() == state.a.grid())) {
    throw std::invalid_argument("assemble_supercritical: corrector on a different grid");
  }
  std::vector<cplx> u(state.a.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double shift = corrector ? corrector->phi1[i] : 0.0;
    u[i] = state.a[i] * std::polar(1.0, shift + state.phi[i] / eps);
  }
  return ComplexField(state.a.grid(), std::move(u), "u_grenier");
}

EulerResidual euler_residual(const GrenierTrajectory& limit) {
  if (limit.variant != GrenierVariant::limit) {
    throw std::invalid_argument("euler_residual: expects a trajectory of the limit system");
  }
  const auto& st = limit.states;
  if (st.size() < 3) throw std::invalid_argument("euler_residual: need at least three stored states");
  const Calculus c(limit.grid);
  const std::size_t n = c.n;
  const int dim = c.dim;
  Buffer vpot(limit.potential.values().begin(), limit.potential.values().end());
  const auto gV = c.grad(vpot);

  auto rho_of = [&](const GrenierState& s) {
    Buffer r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = std::norm(s.a[i]);
    return r;
  };
  EulerResidual res{0.0, 0.0};
  const double h2 = 2.0 * limit.output_dt;
  for (std::size_t k = 1; k + 1 < st.size(); ++k) {
    const Buffer rho = rho_of(st[k]);
    const Buffer rho_p = rho_of(st[k + 1]);
    const Buffer rho_m = rho_of(st[k - 1]);
    const auto grho = c.grad(rho);
    Buffer div(n);
    for (int ax = 0; ax < dim; ++ax) {
      Buffer flux(n);
      for (std::size_t i = 0; i < n; ++i) flux[i] = rho[i].real() * st[k].v[ax][i];
      Buffer d;
      c.ops.derivative(flux, d, ax, 1);
      for (std::size_t i = 0; i < n; ++i) div[i] += d[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double r = (rho_p[i].real() - rho_m[i].real()) / h2 + div[i].real();
      res.continuity = std::max(res.continuity, std::abs(r));
    }
    for (int ax = 0; ax < dim; ++ax) {
      Buffer vax(st[k].v[ax].values().begin(), st[k].v[ax].values().end());
      const auto gv = c.grad(vax);
      for (std::size_t i = 0; i < n; ++i) {
        double adv = 0.0;
        for (int b = 0; b < dim; ++b) adv += st[k].v[b][i] * gv[b][i].real();
        const double r = (st[k + 1].v[ax][i] - st[k - 1].v[ax][i]) / h2 + adv + gV[ax][i].real() + grho[ax][i].real();
        res.momentum = std::max(res.momentum, std::abs(r));
      }
    }
  }
  return res;
}

double velocity_consistency(const GrenierTrajectory& trajectory) {
  double worst = 0.0;
  for (const auto& s : trajectory.states) {
    for (int ax = 0; ax < trajectory.grid.dim(); ++ax) {
      const RealField d = spectral_derivative(s.phi, ax, 1);
      for (std::size_t i = 0; i < d.size(); ++i) worst = std::max(worst, std::abs(d[i] - s.v[ax][i]));
    }
  }
  return worst;
}

}  // namespace wkbnls
