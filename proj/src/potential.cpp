#include "wkbnls/potential.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace wkbnls {

// ---------------------------------------------------------------------------
// TrigSeries

TrigSeries TrigSeries::from_samples(const RealField& f, double drop_below) {
  const PeriodicGrid& g = f.grid();
  SpectralOps ops(g);
  std::vector<cplx> spec(f.size());
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] = f[i];
  ops.forward(spec);

  double largest = 0.0;
  for (auto z : spec) largest = std::max(largest, std::abs(z));
  const double n = static_cast<double>(g.size());

  // f(x) = (1/N) sum_k Re(F_k e^{i k.(x - x0)}); fold k and -k into one term.
  std::map<std::pair<long, long>, Term> folded;
  const Point x0{-0.5 * g.extent(0), g.dim() == 2 ? -0.5 * g.extent(1) : 0.0};
  for (std::size_t flat = 0; flat < spec.size(); ++flat) {
    if (std::abs(spec[flat]) <= drop_below * largest) continue;
    Vec2 k{ops.k(0, flat), g.dim() == 2 ? ops.k(1, flat) : 0.0};
    const double shift = k[0] * x0[0] + k[1] * x0[1];
    const cplx w = spec[flat] * std::polar(1.0, -shift) / n;
    double c = w.real();
    double s = -w.imag();
    // Canonical orientation: first nonzero component positive.
    const bool flip = (k[0] < 0.0) || (k[0] == 0.0 && k[1] < 0.0);
    if (flip) {
      k = {-k[0], -k[1]};
      s = -s;
    }
    const std::pair<long, long> key{std::lround(k[0] * 1e9), std::lround(k[1] * 1e9)};
    auto [it, inserted] = folded.try_emplace(key, Term{k, 0.0, 0.0});
    it->second.c += c;
    it->second.s += s;
  }
  std::vector<Term> terms;
  terms.reserve(folded.size());
  for (auto& [key, term] : folded) terms.push_back(term);
  return TrigSeries(std::move(terms));
}

double TrigSeries::value(const Point& x) const {
  double v = 0.0;
  for (const auto& t : terms_) {
    const double ph = t.k[0] * x[0] + t.k[1] * x[1];
    v += t.c * std::cos(ph) + t.s * std::sin(ph);
  }
  return v;
}

Vec2 TrigSeries::gradient(const Point& x) const {
  Vec2 g{0.0, 0.0};
  for (const auto& t : terms_) {
    const double ph = t.k[0] * x[0] + t.k[1] * x[1];
    const double d = -t.c * std::sin(ph) + t.s * std::cos(ph);
    g[0] += d * t.k[0];
    g[1] += d * t.k[1];
  }
  return g;
}

Mat2 TrigSeries::hessian(const Point& x) const {
  Mat2 h{};
  for (const auto& t : terms_) {
    const double ph = t.k[0] * x[0] + t.k[1] * x[1];
    const double d = -(t.c * std::cos(ph) + t.s * std::sin(ph));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) h[i][j] += d * t.k[i] * t.k[j];
  }
  return h;
}

namespace {

void check_dim(int dim) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("dimension must be 1 or 2");
}

bool same_box(Vec2 box, int dim, const PeriodicGrid& g) {
  if (g.dim() != dim) return false;
  for (int a = 0; a < dim; ++a) {
    if (std::abs(box[a] - g.extent(a)) > 1e-12 * g.extent(a)) return false;
  }
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// PotentialSpec

PotentialSpec PotentialSpec::zero(int dim) {
  check_dim(dim);
  PotentialSpec p;
  p.dim_ = dim;
  return p;
}

PotentialSpec PotentialSpec::harmonic(std::vector<double> omega) {
  check_dim(static_cast<int>(omega.size()));
  for (double w : omega) {
    if (!std::isfinite(w)) throw std::invalid_argument("harmonic potential: omega must be finite");
  }
  PotentialSpec p;
  p.kind_ = Kind::harmonic;
  p.dim_ = static_cast<int>(omega.size());
  p.omega_ = std::move(omega);
  return p;
}

PotentialSpec PotentialSpec::periodic(int dim, Vec2 extent, std::vector<Mode> modes) {
  check_dim(dim);
  std::vector<TrigSeries::Term> terms;
  for (const auto& m : modes) {
    if (!std::isfinite(m.amplitude) || !std::isfinite(m.phase)) {
      throw std::invalid_argument("periodic potential: non-finite mode");
    }
    Vec2 k{0.0, 0.0};
    for (int a = 0; a < dim; ++a) {
      if (!(extent[a] > 0.0)) throw std::invalid_argument("periodic potential: bad box");
      k[a] = 2.0 * std::numbers::pi * m.wave[a] / extent[a];
    }
    // A cos(k.x + p) = A cos p cos(k.x) - A sin p sin(k.x)
    terms.push_back({k, m.amplitude * std::cos(m.phase), -m.amplitude * std::sin(m.phase)});
  }
  PotentialSpec p;
  p.kind_ = Kind::bounded_periodic;
  p.dim_ = dim;
  p.box_ = extent;
  p.series_ = TrigSeries(std::move(terms));
  return p;
}

PotentialSpec PotentialSpec::sampled(const RealField& v) {
  PotentialSpec p;
  p.kind_ = Kind::bounded_periodic;
  p.dim_ = v.grid().dim();
  p.box_ = {v.grid().extent(0), v.grid().dim() == 2 ? v.grid().extent(1) : 0.0};
  p.series_ = TrigSeries::from_samples(v);
  return p;
}

double PotentialSpec::value(double, const Point& x) const {
  switch (kind_) {
    case Kind::zero:
      return 0.0;
    case Kind::harmonic: {
      double v = 0.0;
      for (int a = 0; a < dim_; ++a) v += 0.5 * omega_[a] * omega_[a] * x[a] * x[a];
      return v;
    }
    case Kind::bounded_periodic:
      return series_.value(x);
  }
  return 0.0;
}

Vec2 PotentialSpec::gradient(double, const Point& x) const {
  switch (kind_) {
    case Kind::zero:
      return {0.0, 0.0};
    case Kind::harmonic: {
      Vec2 g{0.0, 0.0};
      for (int a = 0; a < dim_; ++a) g[a] = omega_[a] * omega_[a] * x[a];
      return g;
    }
    case Kind::bounded_periodic:
      return series_.gradient(x);
  }
  return {0.0, 0.0};
}

Mat2 PotentialSpec::hessian(double, const Point& x) const {
  switch (kind_) {
    case Kind::zero:
      return {};
    case Kind::harmonic: {
      Mat2 h{};
      for (int a = 0; a < dim_; ++a) h[a][a] = omega_[a] * omega_[a];
      return h;
    }
    case Kind::bounded_periodic:
      return series_.hessian(x);
  }
  return {};
}

bool PotentialSpec::periodic_on(const PeriodicGrid& grid) const {
  if (grid.dim() != dim_) return false;
  if (kind_ == Kind::zero) return true;
  if (kind_ == Kind::harmonic) return false;
  return same_box(box_, dim_, grid);
}

RealField PotentialSpec::sample(const PeriodicGrid& grid, double t) const {
  return sample_real(grid, [&](const Point& x) { return value(t, x); }, "V");
}

double PotentialSpec::max_second_derivative(const PeriodicGrid& grid) const {
  double m = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Mat2 h = hessian(0.0, grid.node(i));
    for (int a = 0; a < dim_; ++a)
      for (int b = 0; b < dim_; ++b) m = std::max(m, std::abs(h[a][b]));
  }
  return m;
}

// ---------------------------------------------------------------------------
// InitialPhaseSpec

InitialPhaseSpec InitialPhaseSpec::zero(int dim) {
  check_dim(dim);
  InitialPhaseSpec p;
  p.dim_ = dim;
  return p;
}

InitialPhaseSpec InitialPhaseSpec::quadratic(int dim, Mat2 q) {
  check_dim(dim);
  if (dim == 1) {
    q[0][1] = q[1][0] = q[1][1] = 0.0;
  } else if (q[0][1] != q[1][0]) {
    throw std::invalid_argument("quadratic phase: matrix must be symmetric");
  }
  InitialPhaseSpec p;
  p.kind_ = Kind::quadratic;
  p.dim_ = dim;
  p.q_ = q;
  return p;
}

InitialPhaseSpec InitialPhaseSpec::sampled(const RealField& phi) {
  InitialPhaseSpec p;
  p.kind_ = Kind::sampled;
  p.dim_ = phi.grid().dim();
  p.box_ = {phi.grid().extent(0), phi.grid().dim() == 2 ? phi.grid().extent(1) : 0.0};
  p.series_ = TrigSeries::from_samples(phi);
  return p;
}

double InitialPhaseSpec::value(const Point& y) const {
  switch (kind_) {
    case Kind::zero:
      return 0.0;
    case Kind::quadratic: {
      double v = 0.0;
      for (int a = 0; a < dim_; ++a)
        for (int b = 0; b < dim_; ++b) v += 0.5 * y[a] * q_[a][b] * y[b];
      return v;
    }
    case Kind::sampled:
      return series_.value(y);
  }
  return 0.0;
}

Vec2 InitialPhaseSpec::gradient(const Point& y) const {
  switch (kind_) {
    case Kind::zero:
      return {0.0, 0.0};
    case Kind::quadratic: {
      Vec2 g{0.0, 0.0};
      for (int a = 0; a < dim_; ++a)
        for (int b = 0; b < dim_; ++b) g[a] += q_[a][b] * y[b];
      return g;
    }
    case Kind::sampled:
      return series_.gradient(y);
  }
  return {0.0, 0.0};
}

Mat2 InitialPhaseSpec::hessian(const Point& y) const {
  switch (kind_) {
    case Kind::zero:
      return {};
    case Kind::quadratic:
      return q_;
    case Kind::sampled:
      return series_.hessian(y);
  }
  return {};
}

bool InitialPhaseSpec::periodic_on(const PeriodicGrid& grid) const {
  if (grid.dim() != dim_) return false;
  if (kind_ == Kind::zero) return true;
  if (kind_ == Kind::quadratic) return false;
  return same_box(box_, dim_, grid);
}

RealField InitialPhaseSpec::sample(const PeriodicGrid& grid) const {
  return sample_real(grid, [&](const Point& y) { return value(y); }, "phi0");
}

}  // namespace wkbnls
