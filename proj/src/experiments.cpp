#include "wkbnls/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>
#include <thread>

#include "wkbnls/grenier.hpp"
#include "wkbnls/nls.hpp"
#include "wkbnls/rays.hpp"
#include "wkbnls/wkb.hpp"

namespace wkbnls {

namespace {

// Runs f(0..n-1), concurrently when more than one core is available.
template <class F>
void for_each_index(std::size_t n, F f) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  if (hw == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  for (std::size_t start = 0; start < n; start += hw) {
    std::vector<std::future<void>> jobs;
    for (std::size_t i = start; i < std::min(n, start + hw); ++i) {
      jobs.push_back(std::async(std::launch::async, [&f, i] { f(i); }));
    }
    for (auto& j : jobs) j.get();
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) return false;
  }
  return true;
}

bool all_pass(const std::vector<Verdict>& v) {
  return std::all_of(v.begin(), v.end(), [](const Verdict& x) { return x.pass; });
}

void slope_verdicts(const std::vector<SeriesFit>& series, std::vector<Verdict>& out) {
  for (const auto& s : series) {
    if (!s.expected) continue;
    std::string detail = "not enough resolved points";
    if (s.fit) {
      detail = "slope " + fmt(s.fit->slope) + " (expected " + fmt(*s.expected) + " +- " + fmt(s.tolerance) +
               "), R^2 " + fmt(s.fit->r_squared);
    }
    out.push_back({s.metric + " s=" + fmt(s.s), s.pass, detail});
  }
}

double nls_dt(const ExperimentConfig& cfg, double eps) { return eps / cfg.nls_steps_per_epsilon; }

}  // namespace

int points_for(const ExperimentConfig& cfg, double eps) {
  const bool oscillatory = cfg.kappa == 0 || cfg.phase.value("kind", std::string("zero")) != "zero";
  if (!oscillatory) return cfg.points;
  return resolution_points(cfg.extent, eps, cfg.resolution_c, cfg.points);
}

SeriesFit fit_series(std::string metric, double s, std::vector<double> x, std::vector<double> errors,
                     std::vector<bool> excluded, std::optional<double> expected, double tolerance) {
  SeriesFit f{std::move(metric), s, std::move(x), std::move(errors), std::move(excluded), std::nullopt, expected,
              tolerance, true};
  if (f.excluded.empty()) f.excluded.assign(f.x.size(), false);
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < f.x.size(); ++i) {
    if (!f.excluded[i] && f.errors[i] > 0.0 && std::isfinite(f.errors[i])) {
      xs.push_back(f.x[i]);
      ys.push_back(f.errors[i]);
    }
  }
  if (xs.size() >= kMinFitPoints) f.fit = fit_loglog(xs, ys);
  if (expected) f.pass = f.fit && std::abs(f.fit->slope - *expected) <= tolerance;
  return f;
}

bool ConvergenceReport::pass() const { return all_pass(verdicts); }
bool InstabilityReport::pass() const { return all_pass(verdicts); }
bool NormGrowthReport::pass() const { return all_pass(verdicts); }
bool OdeWindowReport::pass() const { return all_pass(verdicts); }

// ---------------------------------------------------------------------------
// Convergence sweeps

namespace {

void supercritical_sweep(const ExperimentConfig& cfg, ConvergenceReport& r) {
  const PeriodicGrid grid = make_grid(cfg, cfg.points);
  const auto& eps = cfg.epsilons;
  const std::size_t n = eps.size();
  const bool corrected = cfg.regime == "corrector";
  const GrenierTrajectory limit =
      solve_phase_amplitude(make_problem(cfg, eps.front(), grid), cfg.t, cfg.grenier_dt, GrenierVariant::limit);
  std::optional<CorrectorTrajectory> corr;
  if (corrected) {
    const SemiclassicalProblem p = make_problem(cfg, eps.front(), grid);
    corr = solve_corrector(limit, p.a1(), 2.0 * limit.output_dt);
  }
  const GrenierState& lim = limit.states.back();

  const std::size_t ns = cfg.sobolev.size();
  std::vector<std::vector<double>> ea(ns, std::vector<double>(n)), ep(ns, std::vector<double>(n));
  r.alarms.assign(n, false);
  r.points.assign(n, grid.points(0));
  for_each_index(n, [&](std::size_t i) {
    const GrenierTrajectory full =
        solve_phase_amplitude(make_problem(cfg, eps[i], grid), cfg.t, cfg.grenier_dt, GrenierVariant::full);
    const GrenierState& st = full.states.back();
    r.alarms[i] = full.resolution_alarm || limit.resolution_alarm;
    ComplexField da = st.a - lim.a;
    RealField dp = st.phi - lim.phi;
    if (corrected) {
      const CorrectorState& c = corr->states.back();
      da = da - eps[i] * c.a1;
      dp = dp - eps[i] * c.phi1;
    }
    for (std::size_t k = 0; k < ns; ++k) {
      ea[k][i] = sobolev_norm(da, cfg.sobolev[k]);
      ep[k][i] = sobolev_norm(dp, cfg.sobolev[k]);
    }
  });
  for (std::size_t k = 0; k < ns; ++k) {
    const double s = cfg.sobolev[k];
    if (corrected) {
      std::vector<double> sum(n);
      for (std::size_t i = 0; i < n; ++i) sum[i] = ea[k][i] + ep[k][i];
      r.series.push_back(fit_series("corrected_hs", s, eps, sum, r.alarms, cfg.expected_slope, cfg.slope_tolerance));
    } else {
      std::vector<double> over_t(n);
      for (std::size_t i = 0; i < n; ++i) over_t[i] = ep[k][i] / std::abs(cfg.t);
      r.series.push_back(fit_series("amplitude_hs", s, eps, ea[k], r.alarms, cfg.expected_slope, cfg.slope_tolerance));
      r.series.push_back(
          fit_series("phase_hs_over_t", s, eps, over_t, r.alarms, cfg.expected_slope, cfg.slope_tolerance));
    }
  }
}

void skew_free_sweep(const ExperimentConfig& cfg, ConvergenceReport& r) {
  const PeriodicGrid grid = make_grid(cfg, cfg.points);
  const auto& eps = cfg.epsilons;
  const std::size_t n = eps.size();
  const std::size_t ns = cfg.sobolev.size();
  auto gap = [&](double e, double t, bool& alarm) {
    const SemiclassicalProblem p = make_problem(cfg, e, grid);
    const GrenierTrajectory full = solve_phase_amplitude(p, t, cfg.grenier_dt, GrenierVariant::full);
    const GrenierTrajectory sf = solve_phase_amplitude(p, t, cfg.grenier_dt, GrenierVariant::skew_free);
    alarm = full.resolution_alarm || sf.resolution_alarm;
    return full.states.back().phi - sf.states.back().phi;
  };
  std::vector<std::vector<double>> g(ns, std::vector<double>(n));
  r.alarms.assign(n, false);
  r.points.assign(n, grid.points(0));
  for_each_index(n, [&](std::size_t i) {
    bool alarm = false;
    const RealField d = gap(eps[i], cfg.t, alarm);
    r.alarms[i] = alarm;
    for (std::size_t k = 0; k < ns; ++k) g[k][i] = sobolev_norm(d, cfg.sobolev[k]);
  });
  for (std::size_t k = 0; k < ns; ++k) {
    r.series.push_back(fit_series("phase_gap_hs", cfg.sobolev[k], eps, g[k], r.alarms, cfg.expected_slope,
                                  cfg.slope_tolerance));
  }
  // Growth in t at the smallest epsilon.
  std::vector<double> times = cfg.times;
  if (times.empty()) times = {0.05, 0.1, 0.2};
  std::vector<std::vector<double>> gt(ns, std::vector<double>(times.size()));
  std::vector<bool> alarms(times.size(), false);
  for (std::size_t j = 0; j < times.size(); ++j) {
    bool alarm = false;
    const RealField d = gap(eps.back(), times[j], alarm);
    alarms[j] = alarm;
    for (std::size_t k = 0; k < ns; ++k) gt[k][j] = sobolev_norm(d, cfg.sobolev[k]);
  }
  for (std::size_t k = 0; k < ns; ++k) {
    SeriesFit f{"phase_gap_hs_vs_t", cfg.sobolev[k], times, gt[k], alarms, std::nullopt, cfg.time_slope,
                cfg.time_slope_tolerance, false};
    std::vector<double> xs, ys;
    for (std::size_t j = 0; j < times.size(); ++j) {
      if (!alarms[j] && gt[k][j] > 0.0) {
        xs.push_back(times[j]);
        ys.push_back(gt[k][j]);
      }
    }
    // A time law only needs a handful of probes; three suffice for the fit.
    if (xs.size() >= 3) f.fit = fit_loglog(xs, ys);
    f.pass = f.fit && std::abs(f.fit->slope - cfg.time_slope) <= cfg.time_slope_tolerance;
    r.series.push_back(std::move(f));
  }
}

void ray_sweep(const ExperimentConfig& cfg, ConvergenceReport& r) {
  const auto& eps = cfg.epsilons;
  const std::size_t n = eps.size();
  const bool critical = cfg.regime == "critical";
  if (critical && cfg.kappa != 1) throw ConfigError("config: regime critical needs kappa = 1");
  if (!critical && cfg.kappa != 2) throw ConfigError("config: regime subcritical needs kappa = 2");

  std::vector<double> err(n), corr(n), ref(n);
  r.alarms.assign(n, false);
  r.points.assign(n, 0);
  for_each_index(n, [&](std::size_t i) {
    const PeriodicGrid grid = make_grid(cfg, points_for(cfg, eps[i]));
    r.points[i] = grid.points(0);
    const SemiclassicalProblem p = make_problem(cfg, eps[i], grid);
    const NLSSolution sol = solve_nls(p, cfg.t, nls_dt(cfg, eps[i]));
    r.alarms[i] = sol.resolution_alarm;
    const PeriodicGrid markers = cfg.marker_points > 0 ? marker_grid(cfg) : grid;
    const RayBundle bundle = integrate_flow(p, markers, cfg.t, cfg.ray_dt);
    const WKBApproximant w = wkb_approximant(p, bundle, cfg.t);
    const ComplexField u = sol.u.back();
    ref[i] = l2_linf_norm(p.a0());
    if (critical) {
      err[i] = l2_linf_norm(u - w.field());
    } else {
      WKBApproximant free = w;
      free.g = RealField::zeros(grid, "G");
      const ComplexField uf = free.field();
      err[i] = l2_linf_norm(u - uf);
      corr[i] = l2_linf_norm(w.field() - uf);
    }
  });
  r.series.push_back(fit_series("profile_l2_linf", 0.0, eps, err, r.alarms, std::nullopt, 0.0));
  r.verdicts.push_back({"monotone decrease", strictly_decreasing(err), "errors must fall as epsilon decreases"});
  if (critical) {
    const double bound = cfg.critical_fraction * ref.back();
    r.verdicts.push_back({"final error below " + fmt(cfg.critical_fraction) + " ||a0||", err.back() < bound,
                          "error " + fmt(err.back()) + " vs bound " + fmt(bound)});
  } else {
    r.series.push_back(fit_series("nonlinear_correction_l2_linf", 0.0, eps, corr, r.alarms, std::nullopt, 0.0));
    bool below = true;
    for (std::size_t i = 0; i < n; ++i) below = below && corr[i] <= err[i];
    r.verdicts.push_back({"nonlinear correction within error budget", below,
                          "||a (e^{i eps G} - 1)|| <= achieved error for every epsilon"});
  }
}

void phase_shift_sweep(const ExperimentConfig& cfg, ConvergenceReport& r) {
  if (cfg.kappa != 0) throw ConfigError("config: regime phase_shift needs kappa = 0");
  const auto& eps = cfg.epsilons;
  const std::size_t n = eps.size();
  std::vector<double> lead(n), corrected(n);
  r.alarms.assign(n, false);
  r.points.assign(n, 0);
  for_each_index(n, [&](std::size_t i) {
    const PeriodicGrid grid = make_grid(cfg, points_for(cfg, eps[i]));
    r.points[i] = grid.points(0);
    const SemiclassicalProblem p = make_problem(cfg, eps[i], grid);
    const NLSSolution sol = solve_nls(p, cfg.t, nls_dt(cfg, eps[i]));
    const GrenierTrajectory limit = solve_phase_amplitude(p, cfg.t, cfg.grenier_dt, GrenierVariant::limit);
    const CorrectorTrajectory c = solve_corrector(limit, p.a1(), 2.0 * limit.output_dt);
    r.alarms[i] = sol.resolution_alarm || limit.resolution_alarm;
    const ComplexField& u = sol.u.back();
    lead[i] = l2_linf_norm(u - assemble_supercritical(limit.states.back(), eps[i]));
    corrected[i] = l2_linf_norm(u - assemble_supercritical(limit.states.back(), eps[i], c.states.back()));
  });
  r.series.push_back(fit_series("leading_l2_linf", 0.0, eps, lead, r.alarms, std::nullopt, 0.0));
  r.series.push_back(fit_series("phase_shift_l2_linf", 0.0, eps, corrected, r.alarms, std::nullopt, 0.0));
  r.verdicts.push_back({"corrected error decreases", strictly_decreasing(corrected),
                        "||u - a e^{i phi1} e^{i phi/eps}|| must fall with epsilon"});
}

}  // namespace

ConvergenceReport run_convergence(const ExperimentConfig& cfg) {
  ConvergenceReport r;
  r.regime = cfg.regime;
  r.t = cfg.t;
  r.epsilons = cfg.epsilons;
  if (cfg.regime == "supercritical_leading" || cfg.regime == "corrector") {
    if (cfg.kappa != 0) throw ConfigError("config: regime " + cfg.regime + " needs kappa = 0");
    supercritical_sweep(cfg, r);
  } else if (cfg.regime == "skew_free") {
    if (cfg.kappa != 0) throw ConfigError("config: regime skew_free needs kappa = 0");
    skew_free_sweep(cfg, r);
  } else if (cfg.regime == "critical" || cfg.regime == "subcritical") {
    ray_sweep(cfg, r);
  } else if (cfg.regime == "phase_shift") {
    phase_shift_sweep(cfg, r);
  } else {
    throw ConfigError("config: unknown regime '" + cfg.regime + "'");
  }
  slope_verdicts(r.series, r.verdicts);
  for (const auto& s : r.series) {
    const bool time_series = s.metric.find("_vs_t") != std::string::npos;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (time_series) {
        r.rows.push_back({cfg.epsilons.back(), s.s, s.metric + "@t=" + fmt(s.x[i]), s.errors[i]});
      } else {
        r.rows.push_back({s.x[i], s.s, s.metric, s.errors[i]});
      }
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Instability

InstabilityReport run_instability(const ExperimentConfig& cfg) {
  if (cfg.kappa != 0) throw ConfigError("config: instability needs kappa = 0");
  if (cfg.potential.value("kind", std::string("zero")) != "zero" ||
      cfg.phase.value("kind", std::string("zero")) != "zero") {
    throw ConfigError("config: instability needs V = 0 and phi0 = 0");
  }
  const auto& eps = cfg.epsilons;
  const std::size_t n = eps.size();
  const ProfileSpec b0spec = cfg.b0 ? *cfg.b0 : cfg.a0;
  InstabilityReport r;
  r.epsilons = eps;
  r.deltas.resize(n);
  r.times.resize(n);
  r.separation.resize(n);
  r.prediction.resize(n);
  r.agreement.resize(n);
  r.distance.assign(cfg.sobolev.size(), std::vector<double>(n));
  r.ratio.resize(n);
  r.outside_window.resize(n);
  r.alarms.resize(n);
  std::vector<double> h1(n);
  std::vector<double> mass(n);

  for_each_index(n, [&](std::size_t i) {
    const double e = eps[i];
    const double delta = std::pow(e, cfg.alpha);
    const double t = cfg.time_factor * e / delta;
    r.deltas[i] = delta;
    r.times[i] = t;
    r.outside_window[i] = t >= std::pow(e, 1.0 / (2 * cfg.taylor_order + 1));
    const PeriodicGrid grid = make_grid(cfg, points_for(cfg, e));
    const SemiclassicalProblem p = make_problem(cfg, e, grid);
    const ComplexField a0 = p.initial_amplitude();
    const ComplexField b0 = make_profile(b0spec, grid, "b0");
    const ComplexField at = a0 + cplx(delta, 0.0) * b0;
    const SemiclassicalProblem q = p.with_a0(p.a0() + cplx(delta, 0.0) * b0);
    std::vector<double> samples;
    for (int k = 1; k <= cfg.samples; ++k) samples.push_back(t * k / cfg.samples);
    const NLSSolution su = solve_nls(p, t, nls_dt(cfg, e), samples);
    const NLSSolution sv = solve_nls(q, t, nls_dt(cfg, e), samples);
    r.alarms[i] = su.resolution_alarm || sv.resolution_alarm;
    mass[i] = std::max(su.mass_drift(), sv.mass_drift());
    const ComplexField diff0 = a0 - at;
    for (std::size_t k = 0; k < cfg.sobolev.size(); ++k) r.distance[k][i] = sobolev_norm(diff0, cfg.sobolev[k]);
    h1[i] = sobolev_norm(diff0, 1.0);
    double best = 0.0;
    for (std::size_t k = 0; k < su.times.size() && h1[i] > 0.0; ++k) {
      best = std::max(best, lp_norm(su.u[k] - sv.u[k], Norm::L2) / h1[i]);
    }
    r.ratio[i] = best;
    r.separation[i] = lp_norm(su.u.back() - sv.u.back(), Norm::L2);
    r.prediction[i] = lp_norm(separation_profile(a0, at, delta, e, t), Norm::L2);
    r.agreement[i] = r.prediction[i] > 0.0 ? std::abs(r.separation[i] - r.prediction[i]) / r.prediction[i] : 0.0;
  });

  r.floor = cfg.separation_floor * r.separation.front();
  bool above = true;
  for (double s : r.separation) above = above && s >= r.floor;
  r.verdicts.push_back({"separation stays above calibrated floor", above,
                        "floor " + fmt(r.floor) + " from the largest epsilon"});
  const bool perturbed = std::all_of(h1.begin(), h1.end(), [](double v) { return v > 0.0; });
  if (n >= kMinFitPoints && perturbed) r.distance_fit = fit_loglog(eps, h1);
  const bool slope_ok = r.distance_fit && std::abs(r.distance_fit->slope - cfg.alpha) <= cfg.distance_slope_tolerance;
  r.verdicts.push_back({"H^1 data distance slope", slope_ok,
                        r.distance_fit ? "slope " + fmt(r.distance_fit->slope) + " (expected " + fmt(cfg.alpha) + ")"
                        : perturbed    ? "not enough points"
                                       : "data are not perturbed"});
  r.verdicts.push_back({"blow-up ratio increases", strictly_increasing(r.ratio),
                        "sup_t ||u - v||_{L^2} / ||a0 - a0~||_{H^1} must grow as epsilon decreases"});
  bool mass_ok = true;
  for (double m : mass) mass_ok = mass_ok && m <= 1e-10;
  r.verdicts.push_back({"mass conservation", mass_ok, "relative drift <= 1e-10 on every run"});

  for (std::size_t i = 0; i < n; ++i) {
    r.rows.push_back({eps[i], 0.0, "separation_l2", r.separation[i]});
    r.rows.push_back({eps[i], 0.0, "prediction_l2", r.prediction[i]});
    for (std::size_t k = 0; k < cfg.sobolev.size(); ++k) {
      r.rows.push_back({eps[i], cfg.sobolev[k], "data_distance_hs", r.distance[k][i]});
    }
    r.rows.push_back({eps[i], 1.0, "blowup_ratio", r.ratio[i]});
  }
  return r;
}

// ---------------------------------------------------------------------------
// Norm growth and exponents

FlowExponents flow_exponents(int n, double s, double k) {
  const double half = 0.5 * n;
  if (n < 3) throw std::invalid_argument("flow_exponents: n must be at least 3");
  if (!(s > 0.0 && s < half - 1.0)) throw std::invalid_argument("flow_exponents: s must lie in (0, n/2 - 1)");
  if (!std::isfinite(k)) throw std::invalid_argument("flow_exponents: k must be finite");
  const double k_lower = s / (half - s);
  const double e = (half - s) * (k_lower - k);
  return {e, e < 0.0 && k <= s && k > k_lower, k_lower};
}

NormGrowthReport run_norm_growth(const ExperimentConfig& cfg) {
  if (cfg.kappa != 0) throw ConfigError("config: normgrowth needs kappa = 0");
  if (cfg.potential.value("kind", std::string("zero")) != "zero" ||
      cfg.phase.value("kind", std::string("zero")) != "zero") {
    throw ConfigError("config: normgrowth needs V = 0 and phi0 = 0");
  }
  const auto& eps = cfg.epsilons;
  const std::size_t n = eps.size();
  NormGrowthReport r;
  r.t = cfg.t;
  r.epsilons = eps;
  r.orders = cfg.orders;
  r.compensated.assign(cfg.orders.size(), std::vector<double>(n));
  r.initial.assign(cfg.orders.size(), std::vector<double>(n));
  r.mass_drift.resize(n);
  r.alarms.resize(n);
  for_each_index(n, [&](std::size_t i) {
    const PeriodicGrid grid = make_grid(cfg, points_for(cfg, eps[i]));
    const SemiclassicalProblem p = make_problem(cfg, eps[i], grid);
    const NLSSolution sol = solve_nls(p, cfg.t, nls_dt(cfg, eps[i]));
    r.alarms[i] = sol.resolution_alarm;
    r.mass_drift[i] = sol.mass_drift();
    for (std::size_t k = 0; k < cfg.orders.size(); ++k) {
      const int m = cfg.orders[k];
      r.compensated[k][i] = std::pow(eps[i], m) * sobolev_norm(sol.u.back(), m, true);
      r.initial[k][i] = sobolev_norm(sol.u.front(), m, true);
    }
  });
  for (std::size_t k = 0; k < cfg.orders.size(); ++k) {
    const auto [lo, hi] = std::minmax_element(r.compensated[k].begin(), r.compensated[k].end());
    const double spread = *hi / *lo;
    r.spread.push_back(spread);
    r.verdicts.push_back({"compensated H^" + std::to_string(cfg.orders[k]) + " spread", spread <= cfg.spread_max,
                          "max/min " + fmt(spread) + " (bound " + fmt(cfg.spread_max) + ")"});
  }
  bool mass_ok = true;
  for (double m : r.mass_drift) mass_ok = mass_ok && m <= 1e-10;
  r.verdicts.push_back({"mass conservation", mass_ok, "relative drift <= 1e-10 on every run"});
  if (cfg.flow) {
    const auto [nn, s, k] = *cfg.flow;
    r.flow = flow_exponents(static_cast<int>(nn), s, k);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < cfg.orders.size(); ++k) {
      r.rows.push_back({eps[i], static_cast<double>(cfg.orders[k]), "compensated_hdot", r.compensated[k][i]});
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// ODE window

OdeWindowReport run_ode_window(const ExperimentConfig& cfg) {
  if (cfg.kappa != 0) throw ConfigError("config: odewindow needs kappa = 0");
  if (cfg.potential.value("kind", std::string("zero")) != "zero" ||
      cfg.phase.value("kind", std::string("zero")) != "zero") {
    throw ConfigError("config: odewindow needs V = 0 and phi0 = 0");
  }
  if (cfg.exponents.size() < 3) throw ConfigError("config: odewindow needs at least three exponents");
  const auto& eps = cfg.epsilons;
  const std::size_t n = eps.size();
  OdeWindowReport r;
  r.epsilons = eps;
  r.exponents = cfg.exponents;
  r.times.assign(n, {});
  r.errors.assign(n, {});
  r.alarms.resize(n);
  for_each_index(n, [&](std::size_t i) {
    std::vector<double> ts;
    for (double p : cfg.exponents) ts.push_back(std::pow(eps[i], p));
    const double t_end = *std::max_element(ts.begin(), ts.end());
    const PeriodicGrid grid = make_grid(cfg, points_for(cfg, eps[i]));
    const SemiclassicalProblem p = make_problem(cfg, eps[i], grid);
    const NLSSolution sol = solve_nls(p, t_end, nls_dt(cfg, eps[i]), ts);
    r.alarms[i] = sol.resolution_alarm;
    const ComplexField a0 = p.initial_amplitude();
    const TaylorCoefficients c = taylor_phase_coefficients(a0, 1);
    r.times[i] = ts;
    for (double t : ts) r.errors[i].push_back(lp_norm(assemble_uK(a0, c, eps[i], t) - sol.at(t), Norm::L2));
  });
  bool ordered = true;
  for (std::size_t i = 0; i < n; ++i) {
    ordered = ordered && r.errors[i][0] < r.errors[i][1] && r.errors[i][1] < r.errors[i][2];
  }
  r.verdicts.push_back({"error grows across the window", ordered,
                        "error(eps^p0) < error(eps^p1) < error(eps^p2) for every epsilon"});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < cfg.exponents.size(); ++k) {
      r.rows.push_back({eps[i], cfg.exponents[k], "ode_window_l2", r.errors[i][k]});
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// JSON

Json to_json(const std::vector<Verdict>& v) {
  Json out = Json::array();
  for (const auto& x : v) out.push_back({{"name", x.name}, {"pass", x.pass}, {"detail", x.detail}});
  return out;
}

Json to_json(const SeriesFit& s) {
  Json j;
  j["metric"] = s.metric;
  j["s"] = s.s;
  j["x"] = s.x;
  j["errors"] = s.errors;
  j["excluded"] = s.excluded;
  if (s.fit) {
    j["slope"] = s.fit->slope;
    j["intercept"] = s.fit->intercept;
    j["r_squared"] = s.fit->r_squared;
  } else {
    j["slope"] = nullptr;
  }
  j["expected"] = s.expected ? Json(*s.expected) : Json(nullptr);
  j["tolerance"] = s.tolerance;
  j["pass"] = s.pass;
  return j;
}

Json to_json(const ConvergenceReport& r) {
  Json j;
  j["regime"] = r.regime;
  j["t"] = r.t;
  j["epsilons"] = r.epsilons;
  j["points"] = r.points;
  j["resolution_alarm"] = r.alarms;
  j["series"] = Json::array();
  for (const auto& s : r.series) j["series"].push_back(to_json(s));
  j["verdicts"] = to_json(r.verdicts);
  j["pass"] = r.pass();
  return j;
}

Json to_json(const InstabilityReport& r) {
  Json j;
  j["epsilons"] = r.epsilons;
  j["deltas"] = r.deltas;
  j["times"] = r.times;
  j["separation_l2"] = r.separation;
  j["prediction_l2"] = r.prediction;
  j["prediction_relative_gap"] = r.agreement;
  j["data_distance_hs"] = r.distance;
  j["blowup_ratio"] = r.ratio;
  j["outside_taylor_window"] = r.outside_window;
  j["resolution_alarm"] = r.alarms;
  j["separation_floor"] = r.floor;
  if (r.distance_fit) {
    j["distance_h1_slope"] = r.distance_fit->slope;
    j["distance_h1_r_squared"] = r.distance_fit->r_squared;
  }
  j["verdicts"] = to_json(r.verdicts);
  j["pass"] = r.pass();
  return j;
}

Json to_json(const NormGrowthReport& r) {
  Json j;
  j["t"] = r.t;
  j["epsilons"] = r.epsilons;
  j["orders"] = r.orders;
  j["compensated"] = r.compensated;
  j["initial_hdot"] = r.initial;
  j["spread"] = r.spread;
  j["mass_drift"] = r.mass_drift;
  j["resolution_alarm"] = r.alarms;
  if (r.flow) {
    j["flow_exponents"] = {{"exponent", r.flow->exponent}, {"diverges", r.flow->diverges}, {"k_lower", r.flow->k_lower}};
  }
  j["verdicts"] = to_json(r.verdicts);
  j["pass"] = r.pass();
  return j;
}

Json to_json(const OdeWindowReport& r) {
  Json j;
  j["epsilons"] = r.epsilons;
  j["exponents"] = r.exponents;
  j["times"] = r.times;
  j["errors_l2"] = r.errors;
  j["resolution_alarm"] = r.alarms;
  j["verdicts"] = to_json(r.verdicts);
  j["pass"] = r.pass();
  return j;
}

}  // namespace wkbnls
