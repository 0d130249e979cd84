#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include "doctest.h"
#include "wkbnls/config.hpp"
#include "wkbnls/experiments.hpp"
#include "wkbnls/field_io.hpp"
#include "wkbnls/fitting.hpp"

using namespace wkbnls;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("wkbnls_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(WKBNLS_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ExperimentConfig config(const std::string& text, const std::string& experiment = {}) {
  return parse_config(Json::parse(text), experiment);
}

}  // namespace

TEST_CASE("power-law fit recovers exact slopes") {
  std::vector<double> x{1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3};
  std::vector<double> y(x.size()), z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = x[i];
    z[i] = 3.0 * std::pow(x[i], 1.5);
  }
  const auto f1 = fit_loglog(x, y);
  CHECK(std::abs(f1.slope - 1.0) < 1e-12);
  CHECK(f1.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  const auto f2 = fit_loglog(x, z);
  CHECK(std::abs(f2.slope - 1.5) < 1e-12);
  CHECK(std::abs(f2.intercept - std::log(3.0)) < 1e-12);
  CHECK(f2.points == x.size());
  std::vector<double> bad{1.0, 0.0};
  std::vector<double> two{1.0, 2.0};
  CHECK_THROWS(fit_loglog(two, bad));
  CHECK_THROWS(fit_loglog(std::vector<double>{1.0}, std::vector<double>{1.0}));
}

TEST_CASE("series fits need four usable points") {
  const auto short_series = fit_series("m", 0.0, {0.1, 0.05, 0.02}, {0.1, 0.05, 0.02}, {}, 1.0, 0.2);
  CHECK_FALSE(short_series.fit.has_value());
  CHECK_FALSE(short_series.pass);
  const auto flagged = fit_series("m", 0.0, {0.1, 0.05, 0.02, 0.01, 0.005}, {0.1, 0.05, 0.02, 0.01, 7.0},
                                  {false, false, false, false, true}, 1.0, 0.2);
  REQUIRE(flagged.fit.has_value());
  CHECK(flagged.fit->points == 4);
  CHECK(flagged.fit->slope == doctest::Approx(1.0));
  CHECK(flagged.pass);
}

TEST_CASE("flow exponents") {
  const auto a = flow_exponents(3, 0.25, 0.25);
  CHECK(a.exponent == doctest::Approx(-0.0625).epsilon(1e-14));
  CHECK(a.diverges);
  CHECK(a.k_lower == doctest::Approx(0.2));
  const auto b = flow_exponents(3, 0.25, a.k_lower);
  CHECK(b.exponent == 0.0);
  CHECK_FALSE(b.diverges);
  const auto c = flow_exponents(4, 0.5, 0.5);
  CHECK(c.exponent == doctest::Approx(-0.25).epsilon(1e-14));
  CHECK(c.diverges);
  CHECK_FALSE(flow_exponents(3, 0.25, 0.1).diverges);
  CHECK_THROWS(flow_exponents(2, 0.25, 0.25));
  CHECK_THROWS(flow_exponents(3, 0.6, 0.25));
  CHECK_THROWS(flow_exponents(3, 0.0, 0.25));
}

TEST_CASE("config defaults, overrides and validation") {
  const auto d = parse_config(Json::object());
  CHECK(d.experiment == "converge");
  CHECK(d.epsilons.size() == 7);
  CHECK(d.points == 1024);
  CHECK(d.extent == 32.0);
  CHECK(d.expected_slope == 1.0);
  CHECK(d.resolved.contains("numerics"));

  const auto c = config(R"({"regime": "corrector"})");
  CHECK(c.expected_slope == 2.0);
  CHECK(c.slope_tolerance == doctest::Approx(0.3));

  Json doc = Json::object();
  apply_override(doc, "/grid/points=256");
  apply_override(doc, "/regime=critical");
  apply_override(doc, "/epsilons=[0.1,0.05]");
  const auto o = parse_config(doc, "nls");
  CHECK(o.points == 256);
  CHECK(o.regime == "critical");
  CHECK(o.epsilons.size() == 2);
  CHECK(o.experiment == "nls");

  CHECK_THROWS_AS(config(R"({"bogus": 1})"), ConfigError);
  CHECK_THROWS_AS(config(R"({"grid": {"pionts": 64}})"), ConfigError);
  CHECK_THROWS_AS(config(R"({"grid": {"points": 100}})"), ConfigError);
  CHECK_THROWS_AS(config(R"({"epsilons": [0.01, 0.1]})"), ConfigError);
  CHECK_THROWS_AS(config(R"({"potential": {"kind": "cubic"}})"), ConfigError);
  CHECK_THROWS_AS(config(R"({"experiment": "plot"})"), ConfigError);
  CHECK_THROWS_AS(config(R"({"instability": {"alpha": 1.5}})", "instability"), ConfigError);
  CHECK_THROWS_AS(config(R"({"a0": {"kind": "gaussian", "width": -1}})"), ConfigError);
  CHECK_THROWS_AS(apply_override(doc, "grid/points=3"), ConfigError);
  CHECK_THROWS_AS(load_config_file("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("config builds problems") {
  const auto c = config(R"({"kappa": 1, "potential": {"kind": "harmonic", "omega": [2]},
                            "a0": {"kind": "constant", "value": [0.6, 0.8]}})");
  const auto grid = make_grid(c, 64);
  const auto p = make_problem(c, 0.05, grid);
  CHECK(p.kappa() == 1);
  CHECK(p.potential().kind() == PotentialSpec::Kind::harmonic);
  CHECK(std::abs(p.a0()[3] - cplx(0.6, 0.8)) < 1e-15);
  CHECK(points_for(config(R"({"kappa": 0})"), 1e-3) == 8192);
  CHECK(points_for(config(R"({"kappa": 2})"), 1e-3) == 1024);
}

TEST_CASE("field dumps round-trip") {
  const auto dir = scratch_dir("dump");
  PeriodicGrid grid({4.0, 8.0}, {8, 16});
  const auto f = sample(grid, [](const Point& x) { return cplx(x[0], -x[1]); }, "u");
  write_field_dump(f, 0.25, dir / "u");
  CHECK(fs::file_size(dir / "u.bin") == grid.size() * 16);
  const auto back = read_field_dump(dir / "u");
  CHECK(back.time == 0.25);
  CHECK(back.field.grid() == grid);
  CHECK(lp_norm(back.field - f, Norm::Linf) == 0.0);
  const auto side = Json::parse(slurp(dir / "u.json"));
  CHECK(side["role"] == "u");
  CHECK(side["grid"]["dim"] == 2);

  const auto r = sample_real(grid, [](const Point& x) { return x[0] * x[1]; }, "phi");
  write_field_dump(r, 1.0, dir / "phi");
  CHECK(Json::parse(slurp(dir / "phi.json"))["real"] == true);
  CHECK(lp_norm(real_part(read_field_dump(dir / "phi").field) - r, Norm::Linf) == 0.0);
  fs::remove_all(dir);
}

TEST_CASE("unperturbed data do not separate") {
  const auto c = config(R"({"b0": {"kind": "zero"}, "epsilons": [0.1, 0.05, 0.02, 0.01]})", "instability");
  const auto r = run_instability(c);
  for (double s : r.separation) CHECK(s == 0.0);
  CHECK_FALSE(r.pass());
}

TEST_CASE("separation follows the leading-order profile once t delta / eps is O(1)") {
  const auto c = config(R"({"epsilons": [0.02, 0.01, 0.005, 0.002]})", "instability");
  const auto r = run_instability(c);
  for (std::size_t i = 0; i < r.epsilons.size(); ++i) {
    CHECK(r.times[i] * r.deltas[i] / r.epsilons[i] == doctest::Approx(2.0));
    CHECK(r.agreement[i] <= 0.2);
  }
  CHECK(r.pass());
}

TEST_CASE("u_1 is exact for constant data over the whole window") {
  const auto c = config(R"({"a0": {"kind": "constant", "value": [0.6, 0.8]}, "epsilons": [0.1, 0.05, 0.02, 0.01]})",
                        "odewindow");
  const auto r = run_ode_window(c);
  for (const auto& row : r.errors) {
    for (double e : row) CHECK(e < 1e-11);
  }
}

TEST_CASE("norm growth starts from eps-independent data") {
  const auto c = config(R"({"epsilons": [0.1, 0.05, 0.02, 0.01]})", "normgrowth");
  const auto r = run_norm_growth(c);
  PeriodicGrid grid(32.0, 1024);
  const auto a0 = gaussian_profile(grid);
  for (std::size_t k = 0; k < r.orders.size(); ++k) {
    for (double v : r.initial[k]) CHECK(v == doctest::Approx(sobolev_norm(a0, r.orders[k], true)).epsilon(1e-10));
  }
  for (double m : r.mass_drift) CHECK(m <= 1e-10);
  CHECK(r.pass());
}

TEST_CASE("CLI: missing config leaves no artifacts") {
  const auto dir = scratch_dir("cli_missing");
  const fs::path out = dir / "out";
  CHECK(run_cli("converge --config " + (dir / "absent.json").string() + " --out " + out.string(), dir / "log") == 2);
  CHECK_FALSE(fs::exists(out));
  CHECK(slurp(dir / "log").find("Usage") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("CLI: malformed config and unknown subcommand") {
  const auto dir = scratch_dir("cli_bad");
  std::ofstream(dir / "bad.json") << "{\"grid\": {\"points\": 1000}}";
  CHECK(run_cli("nls --config " + (dir / "bad.json").string() + " --out " + (dir / "o").string(), dir / "log") == 2);
  CHECK_FALSE(fs::exists(dir / "o"));
  std::ofstream(dir / "broken.json") << "{\"grid\": ";
  CHECK(run_cli("nls --config " + (dir / "broken.json").string() + " --out " + (dir / "o").string(), dir / "log") == 2);
  CHECK(run_cli("plot", dir / "log") != 0);
  fs::remove_all(dir);
}

TEST_CASE("CLI: dry run prints the plan without solving") {
  const auto dir = scratch_dir("cli_dry");
  const fs::path out = dir / "out";
  CHECK(run_cli("converge --config " WKBNLS_CONFIGS "/supercritical.json --dry-run --out " + out.string(), dir / "plan") ==
        0);
  CHECK_FALSE(fs::exists(out));
  const auto plan = Json::parse(slurp(dir / "plan"));
  CHECK(plan["config"]["regime"] == "supercritical_leading");
  CHECK(plan["runs"].size() == 7);
  CHECK(plan["runs"][6]["points"] == 8192);
  fs::remove_all(dir);
}

TEST_CASE("CLI: bundled supercritical example and byte-identical reruns") {
  const auto dir = scratch_dir("cli_run");
  const std::string cfg = " --config " WKBNLS_CONFIGS "/supercritical.json";
  REQUIRE(run_cli("converge" + cfg + " --out " + (dir / "a").string(), dir / "log_a") == 0);
  REQUIRE(run_cli("converge" + cfg + " --out " + (dir / "b").string(), dir / "log_b") == 0);
  const auto report = Json::parse(slurp(dir / "a" / "report.json"));
  CHECK(report["pass"] == true);
  CHECK(report["config"]["regime"] == "supercritical_leading");
  for (const auto& s : report["result"]["series"]) CHECK(std::abs(s["slope"].get<double>() - 1.0) <= 0.2);
  CHECK(slurp(dir / "a" / "report.json") == slurp(dir / "b" / "report.json"));
  CHECK(slurp(dir / "a" / "errors.csv") == slurp(dir / "b" / "errors.csv"));
  CHECK(slurp(dir / "a" / "errors.csv").rfind("epsilon,s,metric,value\n", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("CLI: single runs write their tables and dumps") {
  const auto dir = scratch_dir("cli_single");
  CHECK(run_cli("nls --set /epsilons=[0.05] --set /t=0.1 --set /instability/samples=4 --set /output/dump_fields=true --out " +
                    (dir / "nls").string(),
                dir / "log") == 0);
  CHECK(fs::exists(dir / "nls" / "nls.csv"));
  CHECK(fs::exists(dir / "nls" / "u.bin"));
  CHECK(fs::exists(dir / "nls" / "u.json"));
  CHECK(run_cli("grenier --set /epsilons=[0.05] --set /grenier/variant=limit --out " + (dir / "g").string(), dir / "log") ==
        0);
  const auto rep = Json::parse(slurp(dir / "g" / "report.json"));
  CHECK(rep["result"]["euler_residual"]["momentum"].get<double>() < 1e-3);
  CHECK(run_cli("wkb --set /kappa=0 --out " + (dir / "w").string(), dir / "log") == 2);
  CHECK(run_cli("rays --set /potential={\\\"kind\\\":\\\"harmonic\\\",\\\"omega\\\":[1]} --set /grid/extent=8 "
                "--set /grid/points=64 --set /rays/marker_extent=100 --set /rays/marker_points=512 --set /rays/t_final=2 "
                "--out " +
                    (dir / "r").string(),
                dir / "log") == 0);
  const auto rays = Json::parse(slurp(dir / "r" / "report.json"));
  CHECK(rays["result"]["caustic_time"].get<double>() == doctest::Approx(std::acos(0.1)).epsilon(1e-6));
  fs::remove_all(dir);
}
