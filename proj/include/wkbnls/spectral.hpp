#pragma once

// Periodic grids, sampled fields and Fourier-based calculus on them.
//
// The whole space is truncated to a box [-L/2, L/2)^dim with uniform nodes
// x_j = -L/2 + j*h.  Norms are integral norms (Plancherel-normalised), so a
// refined grid leaves them unchanged.

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace wkbnls {

using cplx = std::complex<double>;
using Point = std::array<double, 2>;

class PeriodicGrid {
 public:
  PeriodicGrid(double extent, int points);
  PeriodicGrid(std::array<double, 2> extent, std::array<int, 2> points);

  int dim() const { return dim_; }
  double extent(int axis) const { return extent_[axis]; }
  int points(int axis) const { return points_[axis]; }
  double spacing(int axis) const { return extent_[axis] / points_[axis]; }
  std::size_t size() const;
  double cell_volume() const;
  double volume() const;

  double coordinate(int axis, int j) const { return -0.5 * extent_[axis] + j * spacing(axis); }
  // Row-major, axis 0 slowest.
  std::size_t index(int i0, int i1 = 0) const { return static_cast<std::size_t>(i0) * points_[1] + i1; }
  Point node(std::size_t flat) const;
  // Angular wavenumber of FFT bin j: (2*pi/L) * {0..N/2-1, -N/2..-1}.
  double wavenumber(int axis, int j) const;
  bool is_nyquist(int axis, int j) const { return 2 * j == points_[axis]; }
  bool contains(const Point& x) const;

  bool operator==(const PeriodicGrid& other) const;

 private:
  int dim_;
  std::array<double, 2> extent_;
  std::array<int, 2> points_;
};

template <class T>
class Field {
 public:
  Field(PeriodicGrid grid, std::vector<T> values, std::string role = {});

  static Field zeros(const PeriodicGrid& grid, std::string role = {}) {
    return Field(grid, std::vector<T>(grid.size(), T{}), std::move(role));
  }

  const PeriodicGrid& grid() const { return grid_; }
  std::span<const T> values() const { return values_; }
  const T& operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  const std::string& role() const { return role_; }
  Field with_role(std::string role) const { return Field(grid_, values_, std::move(role)); }

 private:
  PeriodicGrid grid_;
  std::vector<T> values_;
  std::string role_;
};

using ComplexField = Field<cplx>;
using RealField = Field<double>;

extern template class Field<cplx>;
extern template class Field<double>;

ComplexField sample(const PeriodicGrid& grid, const std::function<cplx(const Point&)>& f,
                    std::string role = {});
RealField sample_real(const PeriodicGrid& grid, const std::function<double(const Point&)>& f,
                      std::string role = {});

ComplexField to_complex(const RealField& f);
RealField real_part(const ComplexField& f);
RealField imag_part(const ComplexField& f);
RealField modulus(const ComplexField& f);
ComplexField operator-(const ComplexField& a, const ComplexField& b);
ComplexField operator+(const ComplexField& a, const ComplexField& b);
ComplexField operator*(cplx c, const ComplexField& a);
RealField operator-(const RealField& a, const RealField& b);
RealField operator+(const RealField& a, const RealField& b);
RealField operator*(double c, const RealField& a);

enum class Norm { L2, Linf };

// Fourier multiplier (i k)^order along `axis`; Nyquist bin dropped for odd order.
ComplexField spectral_derivative(const ComplexField& f, int axis, int order);
RealField spectral_derivative(const RealField& f, int axis, int order);

// (sum_k w(k)^{2s} |f_k|^2)^{1/2}, w = |k| (homogeneous) or (1+|k|^2)^{1/2}.
double sobolev_norm(const ComplexField& f, double s, bool homogeneous = false);
double sobolev_norm(const RealField& f, double s, bool homogeneous = false);

double lp_norm(const ComplexField& f, Norm p);
double lp_norm(const RealField& f, Norm p);
// ||f||_{L^2} + ||f||_{L^inf}
double l2_linf_norm(const ComplexField& f);

// Trigonometric interpolant evaluated off-grid.  Points must lie in the box.
std::vector<cplx> band_limited_interpolate(const ComplexField& f, std::span<const Point> points);
std::vector<double> band_limited_interpolate(const RealField& f, std::span<const Point> points);

// Spectral-tail level above which a run is flagged as under-resolved.
inline constexpr double kResolutionAlarm = 1e-8;

// Fraction of spectral energy carried by |k| above 2/3 of the Nyquist wavenumber.
double upper_third_fraction(const ComplexField& f);

// Low-level Fourier toolkit shared by the solvers; works on raw buffers laid
// out like PeriodicGrid (row-major).  Forward transform is unnormalised.
class SpectralOps {
 public:
  explicit SpectralOps(const PeriodicGrid& grid);
  ~SpectralOps();
  SpectralOps(const SpectralOps&) = delete;
  SpectralOps& operator=(const SpectralOps&) = delete;

  const PeriodicGrid& grid() const { return grid_; }
  std::size_t size() const { return grid_.size(); }

  void forward(std::vector<cplx>& data) const;
  void inverse(std::vector<cplx>& data) const;  // includes 1/N

  // Wavenumber of flat spectral index along axis.
  double k(int axis, std::size_t flat) const { return k_[axis][flat]; }
  double k_squared(std::size_t flat) const { return k2_[flat]; }
  bool nyquist(int axis, std::size_t flat) const { return nyq_[axis][flat] != 0; }

  void derivative(std::span<const cplx> in, std::vector<cplx>& out, int axis, int order) const;
  void laplacian(std::span<const cplx> in, std::vector<cplx>& out) const;
  // In-place multiplication of the spectrum by exp(-i c |k|^2).
  void apply_free_propagator(std::vector<cplx>& data, double c) const;
  // Zero every mode with |k_axis| > (2/3) k_max on some axis.
  void dealias(std::vector<cplx>& data) const;
  double upper_third_fraction(std::span<const cplx> in) const;

 private:
  struct Plans;
  PeriodicGrid grid_;
  std::shared_ptr<const Plans> plans_;
  std::array<std::vector<double>, 2> k_;
  std::array<std::vector<char>, 2> nyq_;
  std::array<std::vector<char>, 2> upper_;
  std::vector<double> k2_;
};

void require_finite(std::span<const cplx> v, const char* what);
void require_finite(std::span<const double> v, const char* what);

}  // namespace wkbnls
