#pragma once

// JSON experiment configuration.  Every field has a default; the resolved
// document (defaults filled in) is kept for the report's audit trail.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "wkbnls/potential.hpp"
#include "wkbnls/problem.hpp"
#include "wkbnls/spectral.hpp"

namespace wkbnls {

using Json = nlohmann::ordered_json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// gaussian: amplitude exp(-|x-center|^2/width^2) exp(i wavenumber.x); constant: value; zero.
struct ProfileSpec {
  std::string kind = "gaussian";
  double amplitude = 1.0;
  double width = 1.0;
  Point center{};
  Point wavenumber{};
  cplx value{};
};

struct ExperimentConfig {
  std::string experiment = "converge";
  std::string regime = "supercritical_leading";
  std::vector<double> epsilons{1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3};
  int kappa = 0;

  int dim = 1;
  double extent = 32.0;
  int points = 1024;

  Json potential = Json{{"kind", "zero"}};
  Json phase = Json{{"kind", "zero"}};
  ProfileSpec a0;
  std::optional<ProfileSpec> a1;
  std::optional<ProfileSpec> b0;

  double t = 0.2;
  std::vector<double> times;  // secondary schedule (t-slope, output samples)
  std::vector<double> sobolev{0.0, 1.0, 2.0};

  double grenier_dt = 1e-3;
  double nls_steps_per_epsilon = 50.0;
  double resolution_c = 0.25;

  double expected_slope = 1.0;
  double slope_tolerance = 0.2;
  double time_slope = 2.0;
  double time_slope_tolerance = 0.3;
  double critical_fraction = 0.05;

  double alpha = 0.5;
  double time_factor = 2.0;
  int taylor_order = 1;
  int samples = 20;
  double separation_floor = 0.5;
  double distance_slope_tolerance = 0.05;

  std::vector<int> orders{1, 2};
  double spread_max = 4.0;
  std::vector<double> exponents{0.6, 0.45, 0.3, 0.2};

  std::optional<std::array<double, 3>> flow;  // n, s, k

  double ray_dt = 1e-3;
  double ray_t_final = 1.0;
  double caustic_threshold = 0.1;
  double marker_extent = 0.0;  // 0: same box as the grid
  int marker_points = 0;

  std::string variant = "full";
  bool dump_fields = false;

  Json resolved;
};

Json load_config_file(const std::filesystem::path& path);
// "/json/pointer=value"; value is parsed as JSON, falling back to a string.
void apply_override(Json& doc, const std::string& assignment);
// Validates and fills defaults; `experiment` overrides the document's field when non-empty.
ExperimentConfig parse_config(const Json& doc, const std::string& experiment = {});

PeriodicGrid make_grid(const ExperimentConfig& cfg, int points);
PeriodicGrid marker_grid(const ExperimentConfig& cfg);
PotentialSpec make_potential(const ExperimentConfig& cfg, const PeriodicGrid& grid);
InitialPhaseSpec make_phase(const ExperimentConfig& cfg, const PeriodicGrid& grid);
ComplexField make_profile(const ProfileSpec& p, const PeriodicGrid& grid, const std::string& role);
SemiclassicalProblem make_problem(const ExperimentConfig& cfg, double eps, const PeriodicGrid& grid);

}  // namespace wkbnls
