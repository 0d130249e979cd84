// Command-line front end: one subcommand per experiment or single run.
// Exit status: 0 all verdicts pass, 1 a verdict failed, 2 configuration or runtime error.

#include <cmath>
#include <filesystem>
#include <functional>
#include <memory>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "wkbnls/config.hpp"
#include "wkbnls/experiments.hpp"
#include "wkbnls/field_io.hpp"
#include "wkbnls/grenier.hpp"
#include "wkbnls/nls.hpp"
#include "wkbnls/rays.hpp"
#include "wkbnls/wkb.hpp"

using namespace wkbnls;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  Json result;
  std::vector<ErrorRow> rows;
  bool pass = true;
  // Deferred artifact writers, run only once the result is complete.
  std::vector<std::function<void(const fs::path&)>> artifacts;
};

Json verdict_json(const std::vector<Verdict>& v) { return to_json(v); }

std::string sci(double x) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << x;
  return os.str();
}

bool all_pass(const std::vector<Verdict>& v) {
  for (const auto& x : v) {
    if (!x.pass) return false;
  }
  return true;
}

Outcome run_rays(const ExperimentConfig& cfg) {
  const PeriodicGrid grid = make_grid(cfg, cfg.points);
  const PeriodicGrid markers = marker_grid(cfg);
  const PotentialSpec v = make_potential(cfg, grid);
  const InitialPhaseSpec phi0 = make_phase(cfg, grid);
  auto bundle = std::make_shared<RayBundle>(integrate_flow(v, phi0, markers, cfg.ray_t_final, cfg.ray_dt));
  const auto t_star = caustic_time(*bundle, cfg.caustic_threshold);

  // Hamilton-Jacobi residual on the Eulerian grid at a few nodes before the horizon.
  const bool periodic = v.periodic_on(grid) && phi0.periodic_on(grid);
  const SpatialDerivative mode = periodic ? SpatialDerivative::spectral : SpatialDerivative::finite_difference;
  double worst = 0.0;
  std::size_t checked = 0;
  const std::size_t last = bundle->node_count();
  const std::size_t stride = std::max<std::size_t>(1, last / 10);
  for (std::size_t node = 3; node + 3 < last; node += stride) {
    if (bundle->time(node + 3) >= bundle->caustic_horizon()) break;
    worst = std::max(worst, hamilton_jacobi_residual(*bundle, grid, node, mode));
    ++checked;
  }
  Outcome o;
  o.result["caustic_horizon"] = std::isfinite(bundle->caustic_horizon()) ? Json(bundle->caustic_horizon()) : Json(nullptr);
  o.result["caustic_time"] = t_star ? Json(*t_star) : Json(nullptr);
  o.result["threshold"] = cfg.caustic_threshold;
  o.result["nodes"] = bundle->node_count();
  o.result["markers"] = bundle->marker_count();
  o.result["hj_residual"] = worst;
  o.result["hj_nodes_checked"] = checked;
  o.result["hj_derivative"] = periodic ? "spectral" : "finite_difference";
  std::vector<Verdict> v_list{{"Hamilton-Jacobi residual", worst <= 1e-6, "sup residual " + sci(worst)}};
  o.result["verdicts"] = verdict_json(v_list);
  o.pass = all_pass(v_list);
  o.rows.push_back({0.0, 0.0, "hj_residual", worst});
  if (t_star) o.rows.push_back({0.0, 0.0, "caustic_time", *t_star});
  o.artifacts.push_back([bundle](const fs::path& dir) {
    std::ofstream out(dir / "rays.csv");
    write_bundle_csv(*bundle, out, std::max<std::size_t>(1, bundle->node_count() / 200));
  });
  return o;
}

Outcome run_wkb(const ExperimentConfig& cfg) {
  if (cfg.kappa < 1) throw ConfigError("config: wkb needs kappa = 1 or 2");
  const double eps = cfg.epsilons.front();
  const PeriodicGrid grid = make_grid(cfg, cfg.points);
  const SemiclassicalProblem p = make_problem(cfg, eps, grid);
  const PeriodicGrid markers = cfg.marker_points > 0 ? marker_grid(cfg) : grid;
  const RayBundle bundle = integrate_flow(p, markers, cfg.t, cfg.ray_dt);
  const WKBApproximant w = wkb_approximant(p, bundle, cfg.t);
  const ComplexField u = w.field();
  double modulus_gap = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) modulus_gap = std::max(modulus_gap, std::abs(std::abs(u[i]) - std::abs(w.a[i])));
  Outcome o;
  o.result["epsilon"] = eps;
  o.result["t"] = cfg.t;
  o.result["regime"] = to_string(w.regime);
  o.result["caustic_horizon"] = std::isfinite(w.horizon) ? Json(w.horizon) : Json(nullptr);
  o.result["amplitude_l2"] = lp_norm(w.a, Norm::L2);
  o.result["G_linf"] = lp_norm(w.g, Norm::Linf);
  o.result["modulus_gap"] = modulus_gap;
  std::vector<Verdict> v_list{{"modulus preservation", modulus_gap <= 1e-12, "sup ||u| - |a|| = " + sci(modulus_gap)}};
  o.result["verdicts"] = verdict_json(v_list);
  o.pass = all_pass(v_list);
  o.rows.push_back({eps, 0.0, "modulus_gap", modulus_gap});
  if (cfg.dump_fields) {
    o.artifacts.push_back([w, u](const fs::path& dir) {
      write_field_dump(u, w.time, dir / "u_wkb");
      write_field_dump(w.a, w.time, dir / "a");
      write_field_dump(w.g, w.time, dir / "G");
      write_field_dump(w.phase, w.time, dir / "phi_eik");
    });
  }
  return o;
}

Outcome run_grenier(const ExperimentConfig& cfg) {
  const double eps = cfg.epsilons.front();
  const PeriodicGrid grid = make_grid(cfg, cfg.points);
  const SemiclassicalProblem p = make_problem(cfg, eps, grid);
  const GrenierVariant variant = cfg.variant == "full"        ? GrenierVariant::full
                                 : cfg.variant == "skew_free" ? GrenierVariant::skew_free
                                                              : GrenierVariant::limit;
  const long steps = std::max(1L, std::lround(std::abs(cfg.t) / cfg.grenier_dt));
  int every = 1;
  for (int c = std::max(1, cfg.samples > 0 ? static_cast<int>(steps / cfg.samples) : 1); c >= 1; --c) {
    if (steps % c == 0) {
      every = c;
      break;
    }
  }
  auto traj = std::make_shared<GrenierTrajectory>(solve_phase_amplitude(p, cfg.t, cfg.grenier_dt, variant, every));
  const double m0 = std::pow(lp_norm(traj->states.front().a, Norm::L2), 2);
  double mass = 0.0;
  for (const auto& s : traj->states) mass = std::max(mass, std::abs(std::pow(lp_norm(s.a, Norm::L2), 2) - m0) / m0);
  const double vel = velocity_consistency(*traj);
  Outcome o;
  o.result["epsilon"] = eps;
  o.result["variant"] = to_string(variant);
  o.result["dt"] = traj->dt;
  o.result["states"] = traj->states.size();
  o.result["mass_drift"] = mass;
  o.result["velocity_consistency"] = vel;
  o.result["max_upper_fraction"] = traj->max_upper_fraction;
  o.result["resolution_alarm"] = traj->resolution_alarm;
  std::vector<Verdict> v_list{{"mass conservation", mass <= 1e-8, "relative drift of int |a|^2 = " + sci(mass)},
                              {"v = grad phi", vel <= 1e-10, "sup |v - grad phi| = " + sci(vel)},
                              {"resolved", !traj->resolution_alarm, "upper-third spectral fraction <= 1e-8"}};
  if (variant == GrenierVariant::limit && traj->states.size() >= 3) {
    const EulerResidual er = euler_residual(*traj);
    o.result["euler_residual"] = {{"momentum", er.momentum}, {"continuity", er.continuity}};
    o.rows.push_back({eps, 0.0, "euler_residual", er.max()});
  }
  o.result["verdicts"] = verdict_json(v_list);
  o.pass = all_pass(v_list);
  o.rows.push_back({eps, 0.0, "mass_drift", mass});
  o.artifacts.push_back([traj, dump = cfg.dump_fields](const fs::path& dir) {
    std::ofstream out(dir / "grenier.csv");
    write_grenier_csv(*traj, out);
    if (dump) {
      const auto& s = traj->states.back();
      write_field_dump(s.a, s.t, dir / "a");
      write_field_dump(s.phi, s.t, dir / "phi");
    }
  });
  return o;
}

Outcome run_nls(const ExperimentConfig& cfg) {
  const double eps = cfg.epsilons.front();
  const PeriodicGrid grid = make_grid(cfg, points_for(cfg, eps));
  const SemiclassicalProblem p = make_problem(cfg, eps, grid);
  std::vector<double> outputs;
  for (int k = 1; k <= cfg.samples; ++k) outputs.push_back(cfg.t * k / cfg.samples);
  auto sol = std::make_shared<NLSSolution>(solve_nls(p, cfg.t, eps / cfg.nls_steps_per_epsilon, outputs));
  Outcome o;
  o.result["epsilon"] = eps;
  o.result["points"] = grid.points(0);
  o.result["dt"] = sol->dt;
  o.result["mass_drift"] = sol->mass_drift();
  o.result["energy_drift"] = sol->energy_drift();
  o.result["max_upper_fraction"] = sol->max_upper_fraction;
  o.result["resolution_alarm"] = sol->resolution_alarm;
  std::vector<Verdict> v_list{{"mass conservation", sol->mass_drift() <= 1e-10, "relative drift = " + sci(sol->mass_drift())},
                              {"resolved", !sol->resolution_alarm, "upper-third spectral fraction <= 1e-8"}};
  o.result["verdicts"] = verdict_json(v_list);
  o.pass = all_pass(v_list);
  o.rows.push_back({eps, 0.0, "mass_drift", sol->mass_drift()});
  o.rows.push_back({eps, 0.0, "energy_drift", sol->energy_drift()});
  o.artifacts.push_back([sol, dump = cfg.dump_fields](const fs::path& dir) {
    std::ofstream out(dir / "nls.csv");
    write_nls_csv(*sol, out);
    if (dump) write_field_dump(sol->u.back(), sol->times.back(), dir / "u");
  });
  return o;
}

template <class R>
Outcome wrap(const R& r) {
  Outcome o;
  o.result = to_json(r);
  o.rows = r.rows;
  o.pass = r.pass();
  return o;
}

Outcome dispatch(const ExperimentConfig& cfg) {
  const std::string& k = cfg.experiment;
  if (k == "converge") return wrap(run_convergence(cfg));
  if (k == "instability") return wrap(run_instability(cfg));
  if (k == "normgrowth") return wrap(run_norm_growth(cfg));
  if (k == "odewindow") return wrap(run_ode_window(cfg));
  if (k == "rays") return run_rays(cfg);
  if (k == "wkb") return run_wkb(cfg);
  if (k == "grenier") return run_grenier(cfg);
  return run_nls(cfg);
}

Json plan(const ExperimentConfig& cfg) {
  Json j;
  j["experiment"] = cfg.experiment;
  j["config"] = cfg.resolved;
  Json runs = Json::array();
  for (double e : cfg.epsilons) {
    runs.push_back({{"epsilon", e},
                    {"points", points_for(cfg, e)},
                    {"nls_dt", e / cfg.nls_steps_per_epsilon},
                    {"grenier_dt", cfg.grenier_dt}});
  }
  j["runs"] = runs;
  return j;
}

void write_csv(const fs::path& path, const std::vector<ErrorRow>& rows) {
  std::ofstream out(path);
  out.precision(17);
  out << "epsilon,s,metric,value\n";
  for (const auto& r : rows) out << r.epsilon << ',' << r.s << ',' << r.metric << ',' << r.value << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"WKB and semiclassical NLS experiments"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir = "out";
  bool dry_run = false;
  for (const char* name : {"rays", "wkb", "grenier", "nls", "converge", "instability", "normgrowth", "odewindow"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config,-c", config_path, "JSON configuration file");
    sub->add_option("--set", overrides, "Override a field: /json/pointer=value")->take_all();
    sub->add_option("--out,-o", out_dir, "Output directory");
    sub->add_flag("--dry-run", dry_run, "Print the resolved plan and exit");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string experiment = app.get_subcommands().front()->get_name();

  ExperimentConfig cfg;
  try {
    Json doc = config_path.empty() ? Json::object() : load_config_file(config_path);
    for (const auto& o : overrides) apply_override(doc, o);
    cfg = parse_config(doc, experiment);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n' << app.help() << '\n';
    return 2;
  }

  if (dry_run) {
    std::cout << plan(cfg).dump(2) << '\n';
    return 0;
  }

  Outcome outcome;
  try {
    outcome = dispatch(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    const fs::path dir(out_dir);
    fs::create_directories(dir);
    Json report;
    report["experiment"] = cfg.experiment;
    report["pass"] = outcome.pass;
    report["result"] = outcome.result;
    report["config"] = cfg.resolved;
    std::ofstream(dir / "report.json") << report.dump(2) << '\n';
    write_csv(dir / "errors.csv", outcome.rows);
    for (const auto& a : outcome.artifacts) a(dir);
  } catch (const std::exception& e) {
    std::cerr << "error: writing artifacts: " << e.what() << '\n';
    return 2;
  }
  std::cout << cfg.experiment << ": " << (outcome.pass ? "PASS" : "FAIL") << " (" << out_dir << "/report.json)\n";
  return outcome.pass ? 0 : 1;
}
