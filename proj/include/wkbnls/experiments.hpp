#pragma once

// Experiment drivers: epsilon sweeps with power-law fits, the instability and
// norm-growth mechanisms, the ODE window of u_1, and exponent algebra.

#include <optional>
#include <string>
#include <vector>

#include "wkbnls/config.hpp"
#include "wkbnls/fitting.hpp"

namespace wkbnls {

// One line of errors.csv.
struct ErrorRow {
  double epsilon;
  double s;
  std::string metric;
  double value;
};

struct SeriesFit {
  std::string metric;
  double s;
  std::vector<double> x;  // epsilon (or t for time series)
  std::vector<double> errors;
  std::vector<bool> excluded;  // under-resolved points left out of the fit
  std::optional<LogLogFit> fit;
  std::optional<double> expected;
  double tolerance = 0.0;
  bool pass = true;
};

// Minimum number of points before a slope is fitted.
inline constexpr std::size_t kMinFitPoints = 4;

SeriesFit fit_series(std::string metric, double s, std::vector<double> x, std::vector<double> errors,
                     std::vector<bool> excluded, std::optional<double> expected, double tolerance);

struct Verdict {
  std::string name;
  bool pass;
  std::string detail;
};

struct ConvergenceReport {
  std::string regime;
  double t;
  std::vector<double> epsilons;
  std::vector<int> points;   // grid size used per epsilon
  std::vector<bool> alarms;  // resolution alarm per epsilon
  std::vector<SeriesFit> series;
  std::vector<Verdict> verdicts;
  std::vector<ErrorRow> rows;
  bool pass() const;
};

// Regimes: supercritical_leading, corrector, skew_free, critical, subcritical, phase_shift.
ConvergenceReport run_convergence(const ExperimentConfig& cfg);

struct InstabilityReport {
  std::vector<double> epsilons, deltas, times;
  std::vector<double> separation;   // ||u - v||_{L^2} at t^eps
  std::vector<double> prediction;   // ||separation_profile||_{L^2} at t^eps
  std::vector<double> agreement;    // |separation - prediction| / prediction
  std::vector<std::vector<double>> distance;  // ||a0 - a0~||_{H^s}, per s in cfg.sobolev
  std::vector<double> ratio;        // sup_t ||u - v||_{L^2} / ||a0 - a0~||_{H^1}
  std::vector<bool> outside_window; // t^eps >= eps^{1/(2K+1)}
  std::vector<bool> alarms;
  double floor;                     // separation_floor * separation at the largest epsilon
  std::optional<LogLogFit> distance_fit;
  std::vector<Verdict> verdicts;
  std::vector<ErrorRow> rows;
  bool pass() const;
};

InstabilityReport run_instability(const ExperimentConfig& cfg);

struct FlowExponents {
  double exponent;
  bool diverges;
  double k_lower;
};

// e = s - k - k (n/2 - 1 - s), evaluated as (n/2 - s)(k_lower - k) so that
// e vanishes exactly at k = k_lower = s / (n/2 - s).
FlowExponents flow_exponents(int n, double s, double k);

struct NormGrowthReport {
  double t;
  std::vector<double> epsilons;
  std::vector<int> orders;
  std::vector<std::vector<double>> compensated;  // [order][eps] eps^m ||psi(t)||_{H^m dot}
  std::vector<std::vector<double>> initial;      // same at t = 0
  std::vector<double> mass_drift;
  std::vector<double> spread;  // max/min per order
  std::vector<bool> alarms;
  std::optional<FlowExponents> flow;
  std::vector<Verdict> verdicts;
  std::vector<ErrorRow> rows;
  bool pass() const;
};

NormGrowthReport run_norm_growth(const ExperimentConfig& cfg);

struct OdeWindowReport {
  std::vector<double> epsilons;
  std::vector<double> exponents;
  std::vector<std::vector<double>> times;   // [eps][exponent]
  std::vector<std::vector<double>> errors;  // ||u_1 - u||_{L^2}
  std::vector<bool> alarms;
  std::vector<Verdict> verdicts;
  std::vector<ErrorRow> rows;
  bool pass() const;
};

OdeWindowReport run_ode_window(const ExperimentConfig& cfg);

Json to_json(const SeriesFit& s);
Json to_json(const ConvergenceReport& r);
Json to_json(const InstabilityReport& r);
Json to_json(const NormGrowthReport& r);
Json to_json(const OdeWindowReport& r);
Json to_json(const std::vector<Verdict>& v);

// Grid points for a kappa = 0 run at eps: max(cfg.points, resolution rule).
int points_for(const ExperimentConfig& cfg, double eps);

}  // namespace wkbnls
