#include "wkbnls/wkb.hpp"

#include <cmath>
#include <stdexcept>

namespace wkbnls {

namespace {

// Evaluate a0 at Lagrangian labels; nodes are read directly.  Periodic flows
// wrap labels into the box of a0, otherwise a0 vanishes outside its box.
std::vector<cplx> a0_at_labels(const ComplexField& a0, const std::vector<Point>& y, bool periodic) {
  const PeriodicGrid& g = a0.grid();
  std::vector<cplx> out(y.size());
  std::vector<Point> off;
  std::vector<std::size_t> where;
  for (std::size_t i = 0; i < y.size(); ++i) {
    Point p = y[i];
    if (!periodic && !g.contains(p)) {
      out[i] = cplx{};
      continue;
    }
    std::array<int, 2> idx{0, 0};
    bool on_node = true;
    for (int a = 0; a < g.dim(); ++a) {
      const double L = g.extent(a);
      p[a] -= L * std::floor((p[a] + 0.5 * L) / L);
      const double u = (p[a] + 0.5 * L) / g.spacing(a);
      const double r = std::round(u);
      if (std::abs(u - r) > 1e-12) on_node = false;
      idx[a] = static_cast<int>(r) % g.points(a);
    }
    if (on_node) {
      out[i] = a0[g.dim() == 2 ? g.index(idx[0], idx[1]) : static_cast<std::size_t>(idx[0])];
    } else {
      off.push_back(p);
      where.push_back(i);
    }
  }
  if (!off.empty()) {
    const auto v = band_limited_interpolate(a0, off);
    for (std::size_t q = 0; q < off.size(); ++q) out[where[q]] = v[q];
  }
  return out;
}

void require_same_grid(const PeriodicGrid& a, const PeriodicGrid& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": fields live on different grids");
}

// Simpson integral of f over nodes 0..n with spacing h (3/8 rule closes odd n).
double simpson(const std::vector<double>& f, std::size_t n, double h) {
  if (n == 0) return 0.0;
  if (n == 1) return 0.5 * h * (f[0] + f[1]);
  if (n == 2) return h / 3.0 * (f[0] + 4 * f[1] + f[2]);
  std::size_t even = n % 2 == 0 ? n : n - 3;
  double s = 0.0;
  for (std::size_t i = 0; i + 2 <= even; i += 2) s += f[i] + 4 * f[i + 1] + f[i + 2];
  s *= h / 3.0;
  if (even != n) s += 3.0 * h / 8.0 * (f[even] + 3 * f[even + 1] + 3 * f[even + 2] + f[even + 3]);
  return s;
}

}  // namespace

ComplexField transport_amplitude(const RayBundle& bundle, const ComplexField& a0,
                                 const LagrangianLabels& labels) {
  const auto a = a0_at_labels(a0, labels.y, bundle.periodic());
  const auto j = interpolate_marker_values(bundle, bundle.jacobians(labels.node), labels.y);
  std::vector<cplx> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] / std::sqrt(j[i]);
  return ComplexField(labels.grid, std::move(out), "a");
}

ComplexField transport_amplitude(const RayBundle& bundle, const ComplexField& a0, double t) {
  return transport_amplitude(bundle, a0, invert_flow(bundle, t, a0.grid()));
}

RealField self_modulation_phase(const RayBundle& bundle, const ComplexField& a0,
                                const LagrangianLabels& labels) {
  const std::size_t n = labels.node;
  std::vector<double> integral(bundle.marker_count());
  std::vector<double> f(n + 1);
  for (std::size_t m = 0; m < bundle.marker_count(); ++m) {
    for (std::size_t k = 0; k <= n; ++k) f[k] = 1.0 / bundle.jacobian(k, m);
    integral[m] = simpson(f, n, bundle.dt());
  }
  const auto a = a0_at_labels(a0, labels.y, bundle.periodic());
  const auto in = interpolate_marker_values(bundle, integral, labels.y);
  std::vector<double> g(a.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = -in[i] * std::norm(a[i]);
  return RealField(labels.grid, std::move(g), "G");
}

RealField self_modulation_phase(const RayBundle& bundle, const ComplexField& a0, double t) {
  return self_modulation_phase(bundle, a0, invert_flow(bundle, t, a0.grid()));
}

ComplexField assemble_regime(const ComplexField& a, const RealField& g, const RealField& phi_eik, double eps,
                             int kappa) {
  require_same_grid(a.grid(), g.grid(), "assemble_regime");
  require_same_grid(a.grid(), phi_eik.grid(), "assemble_regime");
  if (kappa != 1 && kappa != 2) throw std::invalid_argument("assemble_regime: kappa must be 1 or 2");
  const double scale = std::pow(eps, kappa - 1);
  std::vector<cplx> u(a.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] = a[i] * std::polar(1.0, scale * g[i] + phi_eik[i] / eps);
  }
  return ComplexField(a.grid(), std::move(u), "u_wkb");
}

ComplexField extract_amplitude(const ComplexField& u, const RealField& phi_eik, double eps) {
  require_same_grid(u.grid(), phi_eik.grid(), "extract_amplitude");
  std::vector<cplx> a(u.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = u[i] * std::polar(1.0, -phi_eik[i] / eps);
  return ComplexField(u.grid(), std::move(a), "a");
}

TaylorCoefficients taylor_phase_coefficients(const ComplexField& a0eps, int K) {
  if (K < 1 || K > kMaxTaylorOrder) throw std::invalid_argument("taylor_phase_coefficients: K must lie in 1..4");
  const PeriodicGrid& grid = a0eps.grid();
  const int dim = grid.dim();
  const std::size_t size = grid.size();
  SpectralOps ops(grid);
  const int top = 2 * K;

  // P_n real (kept complex for the transforms), A_n complex.
  std::vector<std::vector<cplx>> P(top + 1, std::vector<cplx>(size)), A(top + 1, std::vector<cplx>(size));
  std::vector<std::array<std::vector<cplx>, 2>> gP(top + 1), gA(top + 1);
  std::vector<std::vector<cplx>> lP(top + 1);
  A[0].assign(a0eps.values().begin(), a0eps.values().end());

  auto derive = [&](int n) {
    for (int a = 0; a < dim; ++a) {
      ops.derivative(P[n], gP[n][a], a, 1);
      ops.derivative(A[n], gA[n][a], a, 1);
    }
    ops.laplacian(P[n], lP[n]);
  };
  derive(0);
  for (int n = 0; n < top; ++n) {
    std::vector<cplx> p(size), q(size);
    for (int i = 0; i <= n; ++i) {
      const int j = n - i;
      for (std::size_t x = 0; x < size; ++x) {
        double dot_pp = 0.0;
        cplx dot_pa{};
        for (int a = 0; a < dim; ++a) {
          dot_pp += gP[i][a][x].real() * gP[j][a][x].real();
          dot_pa += gP[i][a][x].real() * gA[j][a][x];
        }
        p[x] += -0.5 * dot_pp - (A[i][x] * std::conj(A[j][x])).real();
        q[x] += -dot_pa - 0.5 * A[i][x] * lP[j][x].real();
      }
    }
    for (std::size_t x = 0; x < size; ++x) {
      P[n + 1][x] = cplx(p[x].real() / (n + 1), 0.0);
      A[n + 1][x] = q[x] / static_cast<double>(n + 1);
    }
    derive(n + 1);
  }

  TaylorCoefficients c;
  c.K = K;
  for (int n = 0; n <= top; ++n) {
    std::vector<double> re(size);
    for (std::size_t x = 0; x < size; ++x) re[x] = P[n][x].real();
    c.phase_series.emplace_back(grid, std::move(re), "P");
    c.amplitude_series.emplace_back(grid, A[n], "A");
  }
  for (int j = 1; j <= K; ++j) {
    c.phi.push_back(c.phase_series[2 * j - 1].with_role("Phi"));
    c.amp.push_back(c.amplitude_series[2 * j].with_role("a"));
  }
  return c;
}

RealField taylor_phase(const TaylorCoefficients& c, double t) {
  std::vector<double> v(c.phi.front().size(), 0.0);
  for (int j = 1; j <= c.K; ++j) {
    const double w = std::pow(t, 2 * j - 1);
    const RealField& f = c.phi[j - 1];
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += w * f[i];
  }
  return RealField(c.phi.front().grid(), std::move(v), "Phi");
}

ComplexField assemble_uK(const ComplexField& a0eps, const TaylorCoefficients& coeffs, double eps, double t) {
  require_same_grid(a0eps.grid(), coeffs.phi.front().grid(), "assemble_uK");
  const RealField phi = taylor_phase(coeffs, t);
  std::vector<cplx> u(a0eps.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = a0eps[i] * std::polar(1.0, phi[i] / eps);
  return ComplexField(a0eps.grid(), std::move(u), "u_K");
}

RealField separation_profile(const ComplexField& a0, const ComplexField& a0_tilde, double delta, double eps,
                             double t) {
  require_same_grid(a0.grid(), a0_tilde.grid(), "separation_profile");
  if (!(delta > 0.0)) throw std::invalid_argument("separation_profile: delta must be positive");
  std::vector<double> out(a0.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double theta = t * (std::norm(a0_tilde[i]) - std::norm(a0[i])) / eps;
    out[i] = 2.0 * std::abs(a0[i] * std::sin(0.5 * theta));
  }
  return RealField(a0.grid(), std::move(out), "separation");
}

const char* to_string(WKBRegime r) {
  switch (r) {
    case WKBRegime::subcritical: return "subcritical";
    case WKBRegime::critical: return "critical";
    case WKBRegime::supercritical_leading: return "supercritical_leading";
    case WKBRegime::supercritical_corrected: return "supercritical_corrected";
    case WKBRegime::taylor: return "taylor";
  }
  return "?";
}

ComplexField WKBApproximant::field() const {
  const double scale = std::pow(epsilon, kappa - 1);
  std::vector<cplx> u(a.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] = a[i] * std::polar(1.0, shift[i] + scale * g[i] + phase[i] / epsilon);
  }
  return ComplexField(a.grid(), std::move(u), "u_wkb");
}

WKBApproximant wkb_approximant(const SemiclassicalProblem& problem, const RayBundle& bundle, double t) {
  if (problem.kappa() < 1) throw std::invalid_argument("wkb_approximant: ray route needs kappa >= 1");
  const PeriodicGrid& grid = problem.grid();
  const ComplexField a0 = problem.a0();
  if (t == 0.0) {
    return {problem.kappa() == 1 ? WKBRegime::critical : WKBRegime::subcritical,
            0.0,
            problem.epsilon(),
            problem.kappa(),
            a0,
            RealField::zeros(grid, "G"),
            problem.phase().sample(grid),
            RealField::zeros(grid, "shift"),
            bundle.caustic_horizon()};
  }
  const LagrangianLabels labels = invert_flow(bundle, t, grid);
  return {problem.kappa() == 1 ? WKBRegime::critical : WKBRegime::subcritical,
          t,
          problem.epsilon(),
          problem.kappa(),
          transport_amplitude(bundle, a0, labels),
          self_modulation_phase(bundle, a0, labels),
          eikonal_phase(bundle, labels),
          RealField::zeros(grid, "shift"),
          bundle.caustic_horizon()};
}

}  // namespace wkbnls
