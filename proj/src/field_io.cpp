#include "wkbnls/field_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace wkbnls {

namespace {

void put_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(buf, 8);
}

double get_f64(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  if (!in) throw std::runtime_error("field dump: truncated data file");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

std::filesystem::path with_ext(const std::filesystem::path& base, const char* ext) {
  std::filesystem::path p = base;
  p += ext;
  return p;
}

void write_sidecar(const PeriodicGrid& g, double t, const std::string& role, bool real,
                   const std::filesystem::path& base) {
  nlohmann::ordered_json j;
  j["format"] = "float64-le re,im pairs, row-major, axis 0 slowest";
  j["role"] = role;
  j["time"] = t;
  j["real"] = real;
  j["grid"]["dim"] = g.dim();
  j["grid"]["extent"] = nlohmann::json::array();
  j["grid"]["points"] = nlohmann::json::array();
  for (int a = 0; a < g.dim(); ++a) {
    j["grid"]["extent"].push_back(g.extent(a));
    j["grid"]["points"].push_back(g.points(a));
  }
  j["data"] = with_ext(base, ".bin").filename().string();
  std::ofstream out(with_ext(base, ".json"));
  if (!out) throw std::runtime_error("field dump: cannot write " + with_ext(base, ".json").string());
  out << j.dump(2) << '\n';
}

template <class Get>
void write_bin(std::size_t n, Get get, const std::filesystem::path& base) {
  std::ofstream out(with_ext(base, ".bin"), std::ios::binary);
  if (!out) throw std::runtime_error("field dump: cannot write " + with_ext(base, ".bin").string());
  for (std::size_t i = 0; i < n; ++i) {
    const cplx z = get(i);
    put_f64(out, z.real());
    put_f64(out, z.imag());
  }
}

}  // namespace

void write_field_dump(const ComplexField& f, double t, const std::filesystem::path& base) {
  write_bin(f.size(), [&](std::size_t i) { return f[i]; }, base);
  write_sidecar(f.grid(), t, f.role(), false, base);
}

void write_field_dump(const RealField& f, double t, const std::filesystem::path& base) {
  write_bin(f.size(), [&](std::size_t i) { return cplx(f[i], 0.0); }, base);
  write_sidecar(f.grid(), t, f.role(), true, base);
}

FieldDump read_field_dump(const std::filesystem::path& base) {
  std::ifstream side(with_ext(base, ".json"));
  if (!side) throw std::runtime_error("field dump: missing sidecar " + with_ext(base, ".json").string());
  const auto j = nlohmann::json::parse(side);
  const int dim = j.at("grid").at("dim").get<int>();
  const auto& ext = j.at("grid").at("extent");
  const auto& pts = j.at("grid").at("points");
  const PeriodicGrid g = dim == 1 ? PeriodicGrid(ext.at(0).get<double>(), pts.at(0).get<int>())
                                  : PeriodicGrid({ext.at(0).get<double>(), ext.at(1).get<double>()},
                                                 {pts.at(0).get<int>(), pts.at(1).get<int>()});
  std::ifstream in(with_ext(base, ".bin"), std::ios::binary);
  if (!in) throw std::runtime_error("field dump: missing data file " + with_ext(base, ".bin").string());
  std::vector<cplx> v(g.size());
  for (auto& z : v) {
    const double re = get_f64(in);
    const double im = get_f64(in);
    z = cplx(re, im);
  }
  return {ComplexField(g, std::move(v), j.at("role").get<std::string>()), j.at("time").get<double>()};
}

void write_nls_csv(const NLSSolution& sol, std::ostream& out) {
  out.precision(17);
  out << "t,mass,energy,upper_fraction\n";
  for (std::size_t i = 0; i < sol.times.size(); ++i) {
    out << sol.times[i] << ',' << sol.diagnostics[i].mass << ',' << sol.diagnostics[i].energy << ','
        << upper_third_fraction(sol.u[i]) << '\n';
  }
}

void write_grenier_csv(const GrenierTrajectory& traj, std::ostream& out) {
  out.precision(17);
  out << "t,mass,amplitude_max,phase_max,velocity_residual\n";
  for (const auto& s : traj.states) {
    double vres = 0.0;
    for (int ax = 0; ax < traj.grid.dim(); ++ax) {
      const RealField d = spectral_derivative(s.phi, ax, 1);
      for (std::size_t i = 0; i < d.size(); ++i) vres = std::max(vres, std::abs(d[i] - s.v[ax][i]));
    }
    out << s.t << ',' << std::pow(lp_norm(s.a, Norm::L2), 2) << ',' << lp_norm(s.a, Norm::Linf) << ','
        << lp_norm(s.phi, Norm::Linf) << ',' << vres << '\n';
  }
}

}  // namespace wkbnls
