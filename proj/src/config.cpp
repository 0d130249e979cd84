#include "wkbnls/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace wkbnls {

namespace {

Json profile_json(const ProfileSpec& p) {
  Json j;
  j["kind"] = p.kind;
  if (p.kind == "gaussian") {
    j["amplitude"] = p.amplitude;
    j["width"] = p.width;
    j["center"] = {p.center[0]};
    j["wavenumber"] = {p.wavenumber[0]};
  } else if (p.kind == "constant") {
    j["value"] = {p.value.real(), p.value.imag()};
  }
  return j;
}

Json defaults() {
  const ExperimentConfig d;
  Json j;
  j["experiment"] = d.experiment;
  j["regime"] = d.regime;
  j["epsilons"] = d.epsilons;
  j["kappa"] = d.kappa;
  j["grid"] = {{"dim", d.dim}, {"extent", d.extent}, {"points", d.points}};
  j["potential"] = d.potential;
  j["phase"] = d.phase;
  j["a0"] = profile_json(d.a0);
  j["t"] = d.t;
  j["times"] = Json::array();
  j["sobolev"] = d.sobolev;
  j["numerics"] = {{"grenier_dt", d.grenier_dt},
                   {"nls_steps_per_epsilon", d.nls_steps_per_epsilon},
                   {"resolution_c", d.resolution_c}};
  j["verdict"] = {{"expected_slope", nullptr},
                  {"slope_tolerance", nullptr},
                  {"time_slope", d.time_slope},
                  {"time_slope_tolerance", d.time_slope_tolerance},
                  {"critical_fraction", d.critical_fraction},
                  {"separation_floor", d.separation_floor},
                  {"distance_slope_tolerance", d.distance_slope_tolerance},
                  {"spread_max", d.spread_max}};
  j["instability"] = {{"alpha", d.alpha},
                      {"time_factor", d.time_factor},
                      {"taylor_order", d.taylor_order},
                      {"samples", d.samples}};
  j["normgrowth"] = {{"orders", d.orders}};
  j["odewindow"] = {{"exponents", d.exponents}};
  j["rays"] = {{"dt", d.ray_dt},
               {"t_final", d.ray_t_final},
               {"threshold", d.caustic_threshold},
               {"marker_extent", d.marker_extent},
               {"marker_points", d.marker_points}};
  j["grenier"] = {{"variant", d.variant}};
  j["output"] = {{"dump_fields", d.dump_fields}};
  return j;
}

[[noreturn]] void fail(const std::string& msg) { throw ConfigError("config: " + msg); }

template <class T>
T get(const Json& j, const char* pointer) {
  const Json::json_pointer p(pointer);
  if (!j.contains(p)) fail(std::string("missing field ") + pointer);
  try {
    return j.at(p).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(std::string("field ") + pointer + " has the wrong type");
  }
}

Point point_from(const Json& j, const char* what) {
  if (!j.is_array() || j.empty() || j.size() > 2) fail(std::string(what) + " must be an array of 1 or 2 numbers");
  Point p{};
  for (std::size_t i = 0; i < j.size(); ++i) p[i] = j[i].get<double>();
  return p;
}

ProfileSpec parse_profile(const Json& j, const char* name) {
  if (!j.is_object()) fail(std::string(name) + " must be an object");
  ProfileSpec p;
  p.kind = j.value("kind", std::string("gaussian"));
  try {
    if (p.kind == "gaussian") {
      p.amplitude = j.value("amplitude", 1.0);
      p.width = j.value("width", 1.0);
      if (j.contains("center")) p.center = point_from(j["center"], "center");
      if (j.contains("wavenumber")) p.wavenumber = point_from(j["wavenumber"], "wavenumber");
      if (!(p.width > 0.0)) fail(std::string(name) + ".width must be positive");
    } else if (p.kind == "constant") {
      const Json& v = j.at("value");
      if (v.is_number()) {
        p.value = cplx(v.get<double>(), 0.0);
      } else if (v.is_array() && v.size() == 2) {
        p.value = cplx(v[0].get<double>(), v[1].get<double>());
      } else {
        fail(std::string(name) + ".value must be a number or [re, im]");
      }
    } else if (p.kind != "zero") {
      fail(std::string(name) + ".kind must be gaussian, constant or zero");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(std::string(name) + ": " + e.what());
  }
  return p;
}

void check_keys(const Json& j) {
  static const std::set<std::string> known{
      "experiment", "regime", "epsilons", "kappa", "grid", "potential", "phase", "a0", "a1", "b0", "t",
      "times", "sobolev", "numerics", "verdict", "instability", "normgrowth", "odewindow", "rays", "grenier",
      "output", "description"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) fail("unknown field '" + it.key() + "'");
  }
  const Json d = defaults();
  for (const char* section : {"grid", "numerics", "verdict", "instability", "normgrowth", "odewindow", "rays",
                              "grenier", "output"}) {
    if (!j.contains(section)) continue;
    const Json& sub = j[section];
    if (!sub.is_object()) fail(std::string(section) + " must be an object");
    for (auto it = sub.begin(); it != sub.end(); ++it) {
      const bool extra = std::string(section) == "normgrowth" && it.key() == "flow";
      if (!extra && !d[section].contains(it.key())) {
        fail("unknown field '" + std::string(section) + "/" + it.key() + "'");
      }
    }
  }
}

}  // namespace

Json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config: " + path.string() + " is not valid JSON: " + e.what());
  }
}

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0 || assignment[0] != '/') {
    throw ConfigError("override '" + assignment + "' must look like /json/pointer=value");
  }
  const std::string pointer = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    value = text;
  }
  try {
    doc[Json::json_pointer(pointer)] = value;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("override '" + assignment + "': " + e.what());
  }
}

ExperimentConfig parse_config(const Json& doc, const std::string& experiment) {
  if (!doc.is_object()) fail("top level must be an object");
  check_keys(doc);
  Json merged = defaults();
  merged.merge_patch(doc);
  if (!experiment.empty()) merged["experiment"] = experiment;

  ExperimentConfig c;
  c.experiment = get<std::string>(merged, "/experiment");
  static const std::set<std::string> kinds{"converge", "instability", "normgrowth", "odewindow",
                                           "rays",     "wkb",         "grenier",    "nls"};
  if (!kinds.count(c.experiment)) fail("unknown experiment '" + c.experiment + "'");
  c.regime = get<std::string>(merged, "/regime");
  c.epsilons = get<std::vector<double>>(merged, "/epsilons");
  if (c.epsilons.empty()) fail("epsilons must not be empty");
  for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
    if (!(c.epsilons[i] > 0.0 && c.epsilons[i] <= 1.0)) fail("every epsilon must lie in (0, 1]");
    if (i > 0 && !(c.epsilons[i] < c.epsilons[i - 1])) fail("epsilons must be strictly decreasing");
  }
  c.kappa = get<int>(merged, "/kappa");
  if (c.kappa < 0 || c.kappa > 2) fail("kappa must be 0, 1 or 2");

  c.dim = get<int>(merged, "/grid/dim");
  c.extent = get<double>(merged, "/grid/extent");
  c.points = get<int>(merged, "/grid/points");
  if (c.dim != 1 && c.dim != 2) fail("grid.dim must be 1 or 2");
  if (!(c.extent > 0.0)) fail("grid.extent must be positive");
  if (c.points < 8 || (c.points & (c.points - 1)) != 0) fail("grid.points must be a power of two >= 8");

  c.potential = merged["potential"];
  c.phase = merged["phase"];
  c.a0 = parse_profile(merged["a0"], "a0");
  if (merged.contains("a1") && !merged["a1"].is_null()) c.a1 = parse_profile(merged["a1"], "a1");
  if (merged.contains("b0") && !merged["b0"].is_null()) c.b0 = parse_profile(merged["b0"], "b0");

  c.t = get<double>(merged, "/t");
  c.times = get<std::vector<double>>(merged, "/times");
  c.sobolev = get<std::vector<double>>(merged, "/sobolev");
  for (double s : c.sobolev) {
    if (!(s >= 0.0)) fail("sobolev indices must be non-negative");
  }

  c.grenier_dt = get<double>(merged, "/numerics/grenier_dt");
  c.nls_steps_per_epsilon = get<double>(merged, "/numerics/nls_steps_per_epsilon");
  c.resolution_c = get<double>(merged, "/numerics/resolution_c");
  if (!(c.grenier_dt > 0.0) || !(c.nls_steps_per_epsilon > 0.0) || !(c.resolution_c >= 0.0)) {
    fail("numerics must be positive");
  }

  // Slope windows default per regime.
  if (merged["verdict"]["expected_slope"].is_null()) {
    merged["verdict"]["expected_slope"] = c.regime == "corrector" ? 2.0 : 1.0;
  }
  if (merged["verdict"]["slope_tolerance"].is_null()) {
    merged["verdict"]["slope_tolerance"] = c.regime == "corrector" ? 0.3 : 0.2;
  }
  c.expected_slope = get<double>(merged, "/verdict/expected_slope");
  c.slope_tolerance = get<double>(merged, "/verdict/slope_tolerance");
  c.time_slope = get<double>(merged, "/verdict/time_slope");
  c.time_slope_tolerance = get<double>(merged, "/verdict/time_slope_tolerance");
  c.critical_fraction = get<double>(merged, "/verdict/critical_fraction");
  c.separation_floor = get<double>(merged, "/verdict/separation_floor");
  c.distance_slope_tolerance = get<double>(merged, "/verdict/distance_slope_tolerance");
  c.spread_max = get<double>(merged, "/verdict/spread_max");

  c.alpha = get<double>(merged, "/instability/alpha");
  c.time_factor = get<double>(merged, "/instability/time_factor");
  c.taylor_order = get<int>(merged, "/instability/taylor_order");
  c.samples = get<int>(merged, "/instability/samples");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) fail("instability.alpha must lie in (0, 1)");
  if (c.taylor_order < 1 || c.taylor_order > 4) fail("instability.taylor_order must lie in 1..4");
  if (c.samples < 1) fail("instability.samples must be positive");

  c.orders = get<std::vector<int>>(merged, "/normgrowth/orders");
  if (merged["normgrowth"].contains("flow") && !merged["normgrowth"]["flow"].is_null()) {
    c.flow = std::array<double, 3>{get<double>(merged, "/normgrowth/flow/n"), get<double>(merged, "/normgrowth/flow/s"),
                                   get<double>(merged, "/normgrowth/flow/k")};
  }
  c.exponents = get<std::vector<double>>(merged, "/odewindow/exponents");

  c.ray_dt = get<double>(merged, "/rays/dt");
  c.ray_t_final = get<double>(merged, "/rays/t_final");
  c.caustic_threshold = get<double>(merged, "/rays/threshold");
  c.marker_extent = get<double>(merged, "/rays/marker_extent");
  c.marker_points = get<int>(merged, "/rays/marker_points");
  if (!(c.ray_dt > 0.0) || !(c.ray_t_final > 0.0)) fail("rays.dt and rays.t_final must be positive");
  if (!(c.caustic_threshold > 0.0 && c.caustic_threshold < 1.0)) fail("rays.threshold must lie in (0, 1)");

  c.variant = get<std::string>(merged, "/grenier/variant");
  if (c.variant != "full" && c.variant != "skew_free" && c.variant != "limit") {
    fail("grenier.variant must be full, skew_free or limit");
  }
  c.dump_fields = get<bool>(merged, "/output/dump_fields");

  // Fail early on malformed physics blocks.
  const PeriodicGrid g = make_grid(c, c.points);
  (void)make_potential(c, g);
  (void)make_phase(c, g);
  (void)make_profile(c.a0, g, "a0");
  if (c.a1) (void)make_profile(*c.a1, g, "a1");
  if (c.b0) (void)make_profile(*c.b0, g, "b0");

  c.resolved = merged;
  return c;
}

PeriodicGrid make_grid(const ExperimentConfig& cfg, int points) {
  if (cfg.dim == 1) return PeriodicGrid(cfg.extent, points);
  return PeriodicGrid({cfg.extent, cfg.extent}, {points, points});
}

PeriodicGrid marker_grid(const ExperimentConfig& cfg) {
  const double L = cfg.marker_extent > 0.0 ? cfg.marker_extent : cfg.extent;
  const int n = cfg.marker_points > 0 ? cfg.marker_points : cfg.points;
  if (cfg.dim == 1) return PeriodicGrid(L, n);
  return PeriodicGrid({L, L}, {n, n});
}

namespace {

std::vector<PotentialSpec::Mode> parse_modes(const Json& j, int dim) {
  if (!j.contains("modes") || !j["modes"].is_array()) fail("periodic fields need a 'modes' array");
  std::vector<PotentialSpec::Mode> modes;
  for (const auto& m : j["modes"]) {
    PotentialSpec::Mode mode{m.value("amplitude", 0.0), {0, 0}, m.value("phase", 0.0)};
    const auto wave = m.at("wave").get<std::vector<int>>();
    if (static_cast<int>(wave.size()) != dim) fail("mode wave vector must have one entry per axis");
    for (int a = 0; a < dim; ++a) mode.wave[a] = wave[a];
    modes.push_back(mode);
  }
  return modes;
}

}  // namespace

PotentialSpec make_potential(const ExperimentConfig& cfg, const PeriodicGrid& grid) {
  const Json& j = cfg.potential;
  const std::string kind = j.value("kind", std::string("zero"));
  try {
    if (kind == "zero") return PotentialSpec::zero(cfg.dim);
    if (kind == "harmonic") {
      auto omega = j.at("omega").get<std::vector<double>>();
      if (static_cast<int>(omega.size()) != cfg.dim) fail("harmonic omega must have one entry per axis");
      return PotentialSpec::harmonic(std::move(omega));
    }
    if (kind == "periodic") {
      return PotentialSpec::periodic(cfg.dim, {grid.extent(0), cfg.dim == 2 ? grid.extent(1) : 0.0},
                                     parse_modes(j, cfg.dim));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("potential: ") + e.what());
  }
  fail("potential.kind must be zero, harmonic or periodic");
}

InitialPhaseSpec make_phase(const ExperimentConfig& cfg, const PeriodicGrid& grid) {
  const Json& j = cfg.phase;
  const std::string kind = j.value("kind", std::string("zero"));
  try {
    if (kind == "zero") return InitialPhaseSpec::zero(cfg.dim);
    if (kind == "quadratic") {
      const auto m = j.at("matrix").get<std::vector<std::vector<double>>>();
      Mat2 q{};
      if (static_cast<int>(m.size()) != cfg.dim) fail("phase.matrix must be dim x dim");
      for (int a = 0; a < cfg.dim; ++a) {
        if (static_cast<int>(m[a].size()) != cfg.dim) fail("phase.matrix must be dim x dim");
        for (int b = 0; b < cfg.dim; ++b) q[a][b] = m[a][b];
      }
      return InitialPhaseSpec::quadratic(cfg.dim, q);
    }
    if (kind == "periodic") {
      const auto v = PotentialSpec::periodic(cfg.dim, {grid.extent(0), cfg.dim == 2 ? grid.extent(1) : 0.0},
                                             parse_modes(j, cfg.dim));
      return InitialPhaseSpec::sampled(v.sample(grid));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("phase: ") + e.what());
  }
  fail("phase.kind must be zero, quadratic or periodic");
}

ComplexField make_profile(const ProfileSpec& p, const PeriodicGrid& grid, const std::string& role) {
  if (p.kind == "zero") return ComplexField::zeros(grid, role);
  if (p.kind == "constant") return constant_profile(grid, p.value).with_role(role);
  return gaussian_profile(grid, p.amplitude, p.center, p.width, p.wavenumber).with_role(role);
}

SemiclassicalProblem make_problem(const ExperimentConfig& cfg, double eps, const PeriodicGrid& grid) {
  std::optional<ComplexField> a1;
  if (cfg.a1) a1 = make_profile(*cfg.a1, grid, "a1");
  return SemiclassicalProblem(eps, cfg.kappa, make_potential(cfg, grid), make_phase(cfg, grid),
                              make_profile(cfg.a0, grid, "a0"), std::move(a1));
}

}  // namespace wkbnls
