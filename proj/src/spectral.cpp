#include "wkbnls/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace wkbnls {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void check_axis(int points, double extent) {
  if (points < 8 || !is_power_of_two(points)) {
    throw std::invalid_argument("grid: points per axis must be a power of two >= 8, got " +
                                std::to_string(points));
  }
  if (!(extent > 0.0) || !std::isfinite(extent)) {
    throw std::invalid_argument("grid: extent must be positive and finite");
  }
}

int signed_index(int j, int n) { return j < n / 2 ? j : j - n; }

}  // namespace

// ---------------------------------------------------------------------------
// PeriodicGrid

PeriodicGrid::PeriodicGrid(double extent, int points)
    : dim_(1), extent_{extent, 1.0}, points_{points, 1} {
  check_axis(points, extent);
}

PeriodicGrid::PeriodicGrid(std::array<double, 2> extent, std::array<int, 2> points)
    : dim_(2), extent_(extent), points_(points) {
  check_axis(points[0], extent[0]);
  check_axis(points[1], extent[1]);
}

std::size_t PeriodicGrid::size() const {
  return static_cast<std::size_t>(points_[0]) * static_cast<std::size_t>(points_[1]);
}

double PeriodicGrid::cell_volume() const {
  double v = spacing(0);
  if (dim_ == 2) v *= spacing(1);
  return v;
}

double PeriodicGrid::volume() const { return dim_ == 2 ? extent_[0] * extent_[1] : extent_[0]; }

Point PeriodicGrid::node(std::size_t flat) const {
  if (dim_ == 1) return {coordinate(0, static_cast<int>(flat)), 0.0};
  const int i0 = static_cast<int>(flat / points_[1]);
  const int i1 = static_cast<int>(flat % points_[1]);
  return {coordinate(0, i0), coordinate(1, i1)};
}

double PeriodicGrid::wavenumber(int axis, int j) const {
  return 2.0 * std::numbers::pi / extent_[axis] * signed_index(j, points_[axis]);
}

bool PeriodicGrid::contains(const Point& x) const {
  for (int a = 0; a < dim_; ++a) {
    const double half = 0.5 * extent_[a];
    if (!(x[a] >= -half && x[a] <= half)) return false;
  }
  return true;
}

bool PeriodicGrid::operator==(const PeriodicGrid& other) const {
  return dim_ == other.dim_ && points_ == other.points_ && extent_ == other.extent_;
}

// ---------------------------------------------------------------------------
// Fields

void require_finite(std::span<const cplx> v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag())) {
      std::ostringstream os;
      os << what << ": non-finite sample at index " << i;
      throw std::invalid_argument(os.str());
    }
  }
}

void require_finite(std::span<const double> v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      std::ostringstream os;
      os << what << ": non-finite sample at index " << i;
      throw std::invalid_argument(os.str());
    }
  }
}

template <class T>
Field<T>::Field(PeriodicGrid grid, std::vector<T> values, std::string role)
    : grid_(std::move(grid)), values_(std::move(values)), role_(std::move(role)) {
  if (values_.size() != grid_.size()) {
    throw std::invalid_argument("field: sample count does not match grid");
  }
  require_finite(std::span<const T>(values_), "field");
}

template class Field<cplx>;
template class Field<double>;

ComplexField sample(const PeriodicGrid& grid, const std::function<cplx(const Point&)>& f,
                    std::string role) {
  std::vector<cplx> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.node(i));
  return ComplexField(grid, std::move(v), std::move(role));
}

RealField sample_real(const PeriodicGrid& grid, const std::function<double(const Point&)>& f,
                      std::string role) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.node(i));
  return RealField(grid, std::move(v), std::move(role));
}

namespace {

template <class Out, class In, class Op>
Field<Out> map_field(const Field<In>& f, Op op) {
  std::vector<Out> v(f.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = op(f[i]);
  return Field<Out>(f.grid(), std::move(v), f.role());
}

template <class T, class Op>
Field<T> zip_field(const Field<T>& a, const Field<T>& b, Op op) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("field arithmetic: grid mismatch");
  std::vector<T> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = op(a[i], b[i]);
  return Field<T>(a.grid(), std::move(v), a.role());
}

}  // namespace

ComplexField to_complex(const RealField& f) {
  return map_field<cplx>(f, [](double x) { return cplx(x, 0.0); });
}
RealField real_part(const ComplexField& f) {
  return map_field<double>(f, [](cplx z) { return z.real(); });
}
RealField imag_part(const ComplexField& f) {
  return map_field<double>(f, [](cplx z) { return z.imag(); });
}
RealField modulus(const ComplexField& f) {
  return map_field<double>(f, [](cplx z) { return std::abs(z); });
}
ComplexField operator-(const ComplexField& a, const ComplexField& b) {
  return zip_field(a, b, std::minus<>());
}
ComplexField operator+(const ComplexField& a, const ComplexField& b) {
  return zip_field(a, b, std::plus<>());
}
ComplexField operator*(cplx c, const ComplexField& a) {
  return map_field<cplx>(a, [c](cplx z) { return c * z; });
}
RealField operator-(const RealField& a, const RealField& b) { return zip_field(a, b, std::minus<>()); }
RealField operator+(const RealField& a, const RealField& b) { return zip_field(a, b, std::plus<>()); }
RealField operator*(double c, const RealField& a) {
  return map_field<double>(a, [c](double x) { return c * x; });
}

// ---------------------------------------------------------------------------
// SpectralOps

struct SpectralOps::Plans {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  ~Plans() {
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
  }
};

namespace {

// FFTW's planner is not thread-safe; execution with new-array calls is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

SpectralOps::SpectralOps(const PeriodicGrid& grid) : grid_(grid) {
  {
    using Key = std::array<int, 3>;
    static std::map<Key, std::weak_ptr<const Plans>> cache;
    std::lock_guard lock(planner_mutex());
    const Key key{grid.dim(), grid.points(0), grid.points(1)};
    auto it = cache.find(key);
    if (it != cache.end()) plans_ = it->second.lock();
    if (!plans_) {
      auto plans = std::make_shared<Plans>();
      std::vector<cplx> scratch(grid.size());
      auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
      const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
      if (grid.dim() == 1) {
        plans->fwd = fftw_plan_dft_1d(grid.points(0), buf, buf, FFTW_FORWARD, flags);
        plans->bwd = fftw_plan_dft_1d(grid.points(0), buf, buf, FFTW_BACKWARD, flags);
      } else {
        plans->fwd = fftw_plan_dft_2d(grid.points(0), grid.points(1), buf, buf, FFTW_FORWARD, flags);
        plans->bwd = fftw_plan_dft_2d(grid.points(0), grid.points(1), buf, buf, FFTW_BACKWARD, flags);
      }
      if (!plans->fwd || !plans->bwd) throw std::runtime_error("fftw planning failed");
      plans_ = plans;
      cache[key] = plans_;
    }
  }

  const std::size_t n = grid.size();
  k2_.assign(n, 0.0);
  for (int a = 0; a < 2; ++a) {
    k_[a].assign(n, 0.0);
    nyq_[a].assign(n, 0);
    upper_[a].assign(n, 0);
  }
  for (std::size_t flat = 0; flat < n; ++flat) {
    std::array<int, 2> j{};
    if (grid.dim() == 1) {
      j[0] = static_cast<int>(flat);
    } else {
      j[0] = static_cast<int>(flat / grid.points(1));
      j[1] = static_cast<int>(flat % grid.points(1));
    }
    for (int a = 0; a < grid.dim(); ++a) {
      const int np = grid.points(a);
      k_[a][flat] = grid.wavenumber(a, j[a]);
      nyq_[a][flat] = grid.is_nyquist(a, j[a]) ? 1 : 0;
      upper_[a][flat] = 3 * std::abs(signed_index(j[a], np)) > np ? 1 : 0;
      k2_[flat] += k_[a][flat] * k_[a][flat];
    }
  }
}

SpectralOps::~SpectralOps() = default;

void SpectralOps::forward(std::vector<cplx>& data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plans_->fwd, p, p);
}

void SpectralOps::inverse(std::vector<cplx>& data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plans_->bwd, p, p);
  const double scale = 1.0 / static_cast<double>(data.size());
  for (auto& z : data) z *= scale;
}

void SpectralOps::derivative(std::span<const cplx> in, std::vector<cplx>& out, int axis,
                             int order) const {
  if (axis < 0 || axis >= grid_.dim()) throw std::invalid_argument("derivative: bad axis");
  if (order < 1 || order > 2) throw std::invalid_argument("derivative: order must be 1 or 2");
  out.assign(in.begin(), in.end());
  forward(out);
  const auto& kk = k_[axis];
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (order == 1) {
      out[i] = nyq_[axis][i] ? cplx{} : cplx(0.0, kk[i]) * out[i];
    } else {
      out[i] *= -kk[i] * kk[i];
    }
  }
  inverse(out);
}

void SpectralOps::laplacian(std::span<const cplx> in, std::vector<cplx>& out) const {
  out.assign(in.begin(), in.end());
  forward(out);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= -k2_[i];
  inverse(out);
}

void SpectralOps::apply_free_propagator(std::vector<cplx>& data, double c) const {
  forward(data);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] *= std::polar(1.0, -c * k2_[i]);
  inverse(data);
}

void SpectralOps::dealias(std::vector<cplx>& data) const {
  forward(data);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (upper_[0][i] || upper_[1][i]) data[i] = cplx{};
  }
  inverse(data);
}

double SpectralOps::upper_third_fraction(std::span<const cplx> in) const {
  std::vector<cplx> spec(in.begin(), in.end());
  forward(spec);
  double total = 0.0, upper = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const double e = std::norm(spec[i]);
    total += e;
    if (upper_[0][i] || upper_[1][i]) upper += e;
  }
  return total > 0.0 ? upper / total : 0.0;
}

// ---------------------------------------------------------------------------
// Field-level operations

ComplexField spectral_derivative(const ComplexField& f, int axis, int order) {
  SpectralOps ops(f.grid());
  std::vector<cplx> out;
  ops.derivative(f.values(), out, axis, order);
  return ComplexField(f.grid(), std::move(out), f.role());
}

RealField spectral_derivative(const RealField& f, int axis, int order) {
  return real_part(spectral_derivative(to_complex(f), axis, order));
}

double sobolev_norm(const ComplexField& f, double s, bool homogeneous) {
  if (!(s >= 0.0)) throw std::invalid_argument("sobolev_norm: s must be >= 0");
  SpectralOps ops(f.grid());
  std::vector<cplx> spec(f.values().begin(), f.values().end());
  ops.forward(spec);
  double acc = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const double k2 = ops.k_squared(i);
    double w2s;
    if (homogeneous) {
      w2s = (s == 0.0) ? 1.0 : (k2 == 0.0 ? 0.0 : std::pow(k2, s));
    } else {
      w2s = std::pow(1.0 + k2, s);
    }
    acc += w2s * std::norm(spec[i]);
  }
  const double n = static_cast<double>(f.size());
  return std::sqrt(acc * f.grid().cell_volume() / n);
}

double sobolev_norm(const RealField& f, double s, bool homogeneous) {
  return sobolev_norm(to_complex(f), s, homogeneous);
}

double lp_norm(const ComplexField& f, Norm p) {
  if (p == Norm::Linf) {
    double m = 0.0;
    for (auto z : f.values()) m = std::max(m, std::abs(z));
    return m;
  }
  double acc = 0.0;
  for (auto z : f.values()) acc += std::norm(z);
  return std::sqrt(acc * f.grid().cell_volume());
}

double lp_norm(const RealField& f, Norm p) { return lp_norm(to_complex(f), p); }

double l2_linf_norm(const ComplexField& f) { return lp_norm(f, Norm::L2) + lp_norm(f, Norm::Linf); }

std::vector<cplx> band_limited_interpolate(const ComplexField& f, std::span<const Point> points) {
  const PeriodicGrid& g = f.grid();
  for (const auto& p : points) {
    if (!g.contains(p)) {
      std::ostringstream os;
      os << "band_limited_interpolate: point (" << p[0];
      if (g.dim() == 2) os << ", " << p[1];
      os << ") lies outside the periodic box";
      throw std::invalid_argument(os.str());
    }
  }
  SpectralOps ops(g);
  std::vector<cplx> spec(f.values().begin(), f.values().end());
  ops.forward(spec);
  const double norm = 1.0 / static_cast<double>(g.size());

  // Per-axis basis e^{i k (x - x0)}, with the Nyquist bin split symmetrically (cos).
  auto basis = [&](int axis, double x, std::vector<cplx>& out) {
    const int n = g.points(axis);
    out.resize(n);
    const double d = x + 0.5 * g.extent(axis);
    const double dk = g.wavenumber(axis, 1);
    // Powers of e^{i dk d}, re-anchored every 64 steps to bound round-off.
    cplx w = std::polar(1.0, dk * d);
    cplx p{1.0, 0.0};
    for (int j = 0; j <= n / 2; ++j) {
      if (j % 64 == 0) p = std::polar(1.0, j * dk * d);
      if (j < n / 2) {
        out[j] = p;
        if (j > 0) out[n - j] = std::conj(p);
      } else {
        out[j] = cplx(p.real(), 0.0);
      }
      p *= w;
    }
  };

  std::vector<cplx> result(points.size());
  std::vector<cplx> b0, b1;
  for (std::size_t q = 0; q < points.size(); ++q) {
    basis(0, points[q][0], b0);
    cplx acc{};
    if (g.dim() == 1) {
      for (int j = 0; j < g.points(0); ++j) acc += spec[j] * b0[j];
    } else {
      basis(1, points[q][1], b1);
      for (int j0 = 0; j0 < g.points(0); ++j0) {
        cplx row{};
        for (int j1 = 0; j1 < g.points(1); ++j1) row += spec[g.index(j0, j1)] * b1[j1];
        acc += row * b0[j0];
      }
    }
    result[q] = acc * norm;
  }
  return result;
}

std::vector<double> band_limited_interpolate(const RealField& f, std::span<const Point> points) {
  auto z = band_limited_interpolate(to_complex(f), points);
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i].real();
  return out;
}

double upper_third_fraction(const ComplexField& f) {
  SpectralOps ops(f.grid());
  return ops.upper_third_fraction(f.values());
}

}  // namespace wkbnls
