#pragma once

// Field dumps: raw little-endian float64 (re, im) pairs plus a JSON sidecar
// holding grid, time and role.  Diagnostics tables as CSV.

#include <filesystem>
#include <iosfwd>

#include "wkbnls/grenier.hpp"
#include "wkbnls/nls.hpp"
#include "wkbnls/spectral.hpp"

namespace wkbnls {

// Writes <base>.bin and <base>.json.
void write_field_dump(const ComplexField& f, double t, const std::filesystem::path& base);
void write_field_dump(const RealField& f, double t, const std::filesystem::path& base);

struct FieldDump {
  ComplexField field;
  double time;
};

// Reads a dump written by write_field_dump (real fields come back with zero imaginary part).
FieldDump read_field_dump(const std::filesystem::path& base);

// Columns t, mass, energy, upper_fraction.
void write_nls_csv(const NLSSolution& sol, std::ostream& out);
// Columns t, mass, amplitude_max, phase_max, velocity_residual.
void write_grenier_csv(const GrenierTrajectory& traj, std::ostream& out);

}  // namespace wkbnls
