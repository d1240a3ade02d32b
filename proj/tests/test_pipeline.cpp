#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "eet/cli.hpp"
#include "eet/config.hpp"
#include "eet/errors.hpp"
#include "eet/experiments.hpp"
#include "eet/observables.hpp"
#include "eet/parallel.hpp"

using namespace eet;
namespace fs = std::filesystem;

namespace {

experiments::RunContext fast_context(std::size_t workers = 1) {
  experiments::RunContext ctx;
  ctx.integrator.t_max = 60.0;
  ctx.integrator.samples = evolve::SampleGrid::linear(1.0);
  ctx.workers = workers;
  return ctx;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("eet-test-" + name);
  fs::remove_all(dir);
  return dir;
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  args.insert(args.begin(), "eet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int rc = cli::parse_and_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return rc;
}

evolve::Trajectory ramp(std::vector<double> times, std::vector<double> sink) {
  evolve::Trajectory t;
  t.layout = lindblad::BasisLayout(1, false);
  t.times = std::move(times);
  for (double s : sink) t.populations.push_back({1.0 - s, s});
  return t;
}

}  // namespace

// ---------------------------------------------------------------------------
// Observables

TEST_CASE("saturation time interpolates and caps") {
  const auto t = ramp({0, 1, 2, 3}, {0.0, 0.5, 0.98, 1.0});
  auto s = observables::saturation_time(t, 0.99);
  CHECK(s.reached);
  CHECK(s.value == doctest::Approx(2.5));
  s = observables::saturation_time(t, 0.5);
  CHECK(s.value == doctest::Approx(1.0));

  const auto never = ramp({0, 1, 2}, {0.0, 0.1, 0.2});
  s = observables::saturation_time(never, 0.99, 500.0);
  CHECK_FALSE(s.reached);
  CHECK(s.value == 500.0);
  CHECK(observables::saturation_time(never, 0.99).value == 2.0);
  CHECK_THROWS_AS(observables::saturation_time(t, 1.5), InvalidArgument);
}

TEST_CASE("efficiency and convergence window") {
  const auto t = ramp({0, 5, 10, 15, 20}, {0.0, 0.4, 0.5, 0.5, 0.5});
  CHECK(observables::efficiency(t) == 0.5);
  CHECK(observables::trajectory_converged(t, 10.0, 1e-9));
  CHECK_FALSE(observables::trajectory_converged(t, 15.0, 1e-9));
}

TEST_CASE("localization report") {
  const lindblad::BasisLayout layout(2, true);
  ComplexMatrix rho = ComplexMatrix::Zero(4, 4);
  rho(0, 0) = 0.1;
  rho(1, 1) = 0.3;
  rho(2, 2) = 0.2;
  rho(1, 2) = rho(2, 1) = 0.05;
  rho(3, 3) = 0.4;
  const auto r = observables::localization_report(rho, layout);
  CHECK(r.network_population == doctest::Approx(0.5));
  CHECK(r.sink_population == doctest::Approx(0.4));
  CHECK(r.ground_population == doctest::Approx(0.1));
  CHECK(r.off_sink_entries == 5);
  CHECK(r.level_names.size() == 4);
  const auto csv = observables::grid_csv(r);
  CHECK(csv.rfind("level,ground,site_1,site_2,sink", 0) == 0);
}

// ---------------------------------------------------------------------------
// Parallel map

TEST_CASE("parallel_map keeps index order and rethrows") {
  for (std::size_t w : {1u, 3u, 8u}) {
    const auto out = parallel_map(50, w, [](std::size_t i) { return i * i; });
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == i * i);
  }
  CHECK_THROWS_WITH(parallel_map(20, 4,
                                 [](std::size_t i) -> int {
                                   if (i == 7 || i == 13) throw std::runtime_error("bad " + std::to_string(i));
                                   return 0;
                                 }),
                    "bad 7");
}

// ---------------------------------------------------------------------------
// Experiments

TEST_CASE("edge scan covers every deletion") {
  const auto scan = experiments::edge_deletion_scan(6, fast_context());
  CHECK(scan.sweep.rows.size() == 15);
  CHECK(scan.reports.size() == 15);
  const auto dark = scan.sweep.metric_index("dark_dimension");
  for (std::size_t k = 0; k < 15; ++k) {
    CHECK(scan.sweep.rows[k].metrics[dark] > 0.0);
    const bool is16 = scan.deleted[k] == std::pair<std::size_t, std::size_t>{0, 5};
    CHECK((scan.sweep.rows[k].metrics[0] > 0.999) == is16);
  }
}

TEST_CASE("aggregates are recomputable from rows") {
  const auto ctx = fast_context(2);
  const auto sweep = experiments::disorder_sweep(network::complete_network(4, 0, 3), {0.0, 0.3}, 6, 11, ctx);
  REQUIRE(sweep.rows.size() == 12);
  REQUIRE(sweep.aggregates.size() == 2);
  for (const auto& agg : sweep.aggregates) {
    const auto rows = sweep.rows_at(agg.point);
    double sum = 0.0;
    for (const auto* r : rows) sum += r->summary.eta_inf;
    const double mean = sum / static_cast<double>(rows.size());
    double ss = 0.0;
    for (const auto* r : rows) ss += std::pow(r->summary.eta_inf - mean, 2);
    const double sd = std::sqrt(ss / static_cast<double>(rows.size() - 1));
    CHECK(agg.count == rows.size());
    CHECK(agg.mean_eta == doctest::Approx(mean).epsilon(1e-14));
    CHECK(agg.stddev_eta == doctest::Approx(sd).epsilon(1e-12));
    CHECK(agg.sem_eta == doctest::Approx(sd / std::sqrt(6.0)).epsilon(1e-12));
  }
  // Every zero-disorder realization is the clean network.
  for (const auto* r : sweep.rows_at(0)) CHECK(r->summary.eta_inf == sweep.rows_at(0)[0]->summary.eta_inf);
}

TEST_CASE("sweeps are independent of worker count and repeatable") {
  const auto spec = network::complete_network(5, 0, 4);
  const auto a = experiments::disorder_sweep(spec, {0.2}, 5, 3, fast_context(1));
  const auto b = experiments::disorder_sweep(spec, {0.2}, 5, 3, fast_context(4));
  const auto c = experiments::disorder_sweep(spec, {0.2}, 5, 3, fast_context(1));
  CHECK(experiments::summary_csv(a) == experiments::summary_csv(b));
  CHECK(experiments::summary_csv(a) == experiments::summary_csv(c));
  CHECK(experiments::aggregate_csv(a) == experiments::aggregate_csv(c));
  CHECK(a.config_digest == c.config_digest);
  const auto d = experiments::disorder_sweep(spec, {0.2}, 5, 4, fast_context(1));
  CHECK(experiments::summary_csv(a) != experiments::summary_csv(d));
}

TEST_CASE("default topology family") {
  const auto family = experiments::default_scan_topologies(6, 0);
  CHECK(family.size() == 28);
  for (const auto& g : family) CHECK(network::is_connected(g));
  CHECK(family.back() == network::complete_network(6, 0, 5));
  CHECK(experiments::default_scan_topologies(6, 0) == family);
}

TEST_CASE("hopping sweep and saturation sweep shapes") {
  const auto base = network::complete_network(4, 0, 3);
  const auto h = experiments::hopping_sweep(base, 0, 3, {0.5, 1.0}, fast_context());
  REQUIRE(h.rows.size() == 2);
  CHECK(h.rows[1].summary.eta_inf == doctest::Approx(1.0 / 3.0).epsilon(1e-4));
  CHECK(h.rows[1].metrics[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-10));

  const auto s = experiments::saturation_sweep(base, 0, 3, {1.0, 2.0, 3.0}, 80.0, 0.05, fast_context());
  REQUIRE(s.sweep.rows.size() == 3);
  CHECK_FALSE(s.sweep.rows[0].summary.tau_s->reached);
  CHECK(s.sweep.rows[0].summary.tau_s->value == 80.0);
  CHECK(s.argmin != 1.0);
}

// ---------------------------------------------------------------------------
// Configuration

TEST_CASE("grid and shorthand parsing") {
  CHECK(config::parse_grid("0:1:0.25") == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK(config::parse_grid("0.1:6:0.02").size() == 296);
  CHECK(config::parse_grid("0.5, 2") == std::vector<double>{0.5, 2.0});
  CHECK_THROWS_AS(config::parse_grid("1:0:0.1"), InvalidArgument);
  CHECK_THROWS_AS(config::parse_grid("a,b"), InvalidArgument);
  CHECK_THROWS_AS(config::parse_grid(""), InvalidArgument);

  const auto cut = config::parse_network_shorthand("fcn:6~1,6~2,3");
  CHECK(cut.edge_count() == 13);
  CHECK(cut.hopping(0, 5) == 0.0);
  CHECK(cut.hopping(1, 2) == 0.0);
  CHECK_THROWS_AS(config::parse_network_shorthand("fcn:x"), InvalidArgument);
  CHECK(config::parse_edge("1,6") == std::pair<std::size_t, std::size_t>{0, 5});
  CHECK_THROWS_AS(config::parse_edge("0,6"), InvalidArgument);
  const auto ew = config::parse_edge_weight("2,3:0.4");
  CHECK(ew.a == 1);
  CHECK(ew.b == 2);
  CHECK(ew.weight == 0.4);
}

TEST_CASE("config validation reports every problem") {
  auto cfg = config::defaults_for(config::Experiment::Disorder);
  CHECK(config::validate_config(cfg).empty());
  cfg.noise.gamma_sink = -1.0;
  cfg.integrator.t_max = -5.0;
  cfg.sweep.realizations = 0;
  cfg.network.injection_site = 9;
  CHECK(config::validate_config(cfg).size() >= 4);
}

TEST_CASE("config JSON round trip and digest") {
  auto cfg = config::defaults_for(config::Experiment::TopoScan);
  cfg.network = network::delete_edge(cfg.network, 1, 2);
  cfg.noise.gamma_diss = std::vector<double>(6, 0.01);
  cfg.seed = 77;
  const auto back = config::from_json(config::to_json(cfg));
  CHECK(config::to_json(back) == config::to_json(cfg));
  CHECK(config::digest(back) == config::digest(cfg));

  auto other = cfg;
  other.output_dir = "elsewhere";
  other.workers = 7;
  CHECK(config::digest(other) == config::digest(cfg));
  other.seed = 78;
  CHECK(config::digest(other) != config::digest(cfg));

  auto doc = config::to_json(cfg);
  doc["schema_version"] = 99;
  CHECK_THROWS_AS(config::from_json(doc), InvalidArgument);
}

// ---------------------------------------------------------------------------
// CLI

TEST_CASE("cli exit codes") {
  std::string out, err;
  CHECK(run_cli({"bogus"}, &out, &err) == cli::ConfigError);
  CHECK(run_cli({"simulate", "--gamma-sink", "-1", "-o", scratch("bad").string()}, &out, &err) == cli::ConfigError);
  CHECK(err.find("gamma_sink") != std::string::npos);
  CHECK(run_cli({"simulate", "--network", "/nonexistent.json"}, &out, &err) == cli::ConfigError);
  CHECK(run_cli({"simulate", "--help"}, &out, &err) == cli::Success);

  // t_max too short to settle: not converged.
  const auto dir = scratch("short");
  CHECK(run_cli({"simulate", "--t-max", "5", "-o", dir.string()}, &out, &err) == cli::NotConverged);
  CHECK(fs::exists(dir / "trajectory.csv"));
}

TEST_CASE("cli runs are byte-identical and flags override config files") {
  const auto a = scratch("det-a");
  const auto b = scratch("det-b");
  const std::vector<std::string> common{"disorder",          "--network", "fcn:4", "--chi-grid", "0,0.2",
                                        "--realizations",    "4",         "--seed",  "5",          "--t-max",
                                        "80",                "--sample-step", "1"};
  auto args_a = common;
  args_a.insert(args_a.end(), {"-o", a.string()});
  auto args_b = common;
  args_b.insert(args_b.end(), {"-o", b.string(), "--workers", "3"});
  std::string out;
  const int rc = run_cli(args_a, &out);
  CHECK((rc == cli::Success || rc == cli::NotConverged));
  CHECK(run_cli(args_b) == rc);
  CHECK(slurp(a / "summary.csv") == slurp(b / "summary.csv"));
  CHECK(slurp(a / "aggregate.csv") == slurp(b / "aggregate.csv"));
  CHECK_FALSE(slurp(a / "summary.csv").empty());

  // Re-run from the written config file, overriding one field by flag.
  const auto c = scratch("det-c");
  CHECK(run_cli({"disorder", "--config", (a / "config.json").string(), "-o", c.string()}) == rc);
  CHECK(slurp(a / "summary.csv") == slurp(c / "summary.csv"));
  const auto d = scratch("det-d");
  run_cli({"disorder", "--config", (a / "config.json").string(), "--seed", "6", "-o", d.string()});
  CHECK(slurp(a / "summary.csv") != slurp(d / "summary.csv"));
  CHECK(run_cli({"saturation", "--config", (a / "config.json").string(), "-o", d.string()}) == cli::ConfigError);
}
