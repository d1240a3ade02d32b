#include "eet/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"

#include "eet/errors.hpp"
#include "eet/experiments.hpp"
#include "eet/hamiltonian.hpp"

namespace eet::cli {
namespace {

namespace fs = std::filesystem;
using config::Experiment;
using config::RunConfig;

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

experiments::RunContext context_of(const RunConfig& cfg) {
  experiments::RunContext ctx;
  ctx.noise = cfg.noise;
  ctx.integrator = cfg.integrator;
  ctx.fraction = cfg.sweep.fraction;
  ctx.workers = cfg.workers;
  ctx.seed = cfg.seed;
  return ctx;
}

void prepare_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw InvalidArgument("output directory '" + dir.string() + "' cannot be created: " + ec.message());
  }
  const fs::path probe = dir / ".eet-write-probe";
  {
    std::ofstream f(probe);
    if (!f) {
      throw InvalidArgument("output directory '" + dir.string() + "' is not writable");
    }
  }
  fs::remove(probe, ec);
}

void write_config(const RunConfig& cfg, const fs::path& dir) {
  nlohmann::json doc = config::to_json(cfg);
  doc["config_digest"] = config::digest(cfg);
  experiments::write_atomic(dir / "config.json", doc.dump(2) + "\n");
}

experiments::SweepResult single_row(const experiments::BaselineResult& r, const RunConfig& cfg) {
  experiments::SweepResult sweep;
  sweep.experiment = config::to_string(cfg.experiment);
  sweep.axis_name = "run";
  sweep.metric_names = {"predicted_eta"};
  experiments::SweepRow row;
  row.label = network::describe(r.spec);
  row.summary = r.summary;
  row.summary.config_digest = config::digest(cfg);
  row.metrics = {r.predicted_eta};
  sweep.rows.push_back(row);
  sweep.aggregates = experiments::compute_aggregates(sweep.rows);
  sweep.parameters = config::to_json(cfg);
  sweep.parameters.erase("output_dir");
  sweep.parameters.erase("workers");
  sweep.config_digest = row.summary.config_digest;
  sweep.seed = cfg.seed;
  return sweep;
}

Outcome finish_sweep(const experiments::SweepResult& sweep, const fs::path& dir, std::string line,
                     bool convergence_matters) {
  experiments::write_outputs(sweep, dir);
  Outcome o;
  o.summary_line = std::move(line);
  if (convergence_matters && !sweep.all_converged()) {
    o.exit_code = NotConverged;
    o.summary_line += " [not converged: some runs hit t_max]";
  }
  return o;
}

std::string ensemble_line(const experiments::SweepResult& sweep) {
  std::string line = sweep.experiment + ":";
  for (const auto& a : sweep.aggregates) {
    line += " " + sweep.axis_name + "=" + fixed(a.value, 3) + " mean_eta=" + fixed(a.mean_eta) + "+-" +
            fixed(a.sem_eta);
    if (&a != &sweep.aggregates.back()) line += ";";
  }
  return line;
}

}  // namespace

Outcome run(const RunConfig& cfg) {
  const auto problems = config::validate_config(cfg);
  if (!problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw InvalidArgument(msg);
  }
  const fs::path dir(cfg.output_dir);
  prepare_output_dir(dir);
  write_config(cfg, dir);
  const auto ctx = context_of(cfg);
  const auto& s = cfg.sweep;

  switch (cfg.experiment) {
    case Experiment::Simulate:
    case Experiment::Baseline: {
      const auto r = experiments::simulate(cfg.network, ctx);
      experiments::write_atomic(dir / "trajectory.csv", evolve::to_csv(r.trajectory));
      experiments::write_atomic(dir / "localization.csv", observables::grid_csv(r.localization));
      auto summary = observables::to_json(r.summary);
      summary["config_digest"] = config::digest(cfg);
      summary["predicted_eta"] = r.predicted_eta;
      summary["localization"] = observables::to_json(r.localization);
      experiments::write_atomic(dir / "summary.json", summary.dump(2) + "\n");
      const auto h = hamiltonian::build_hamiltonian(cfg.network);
      const auto expansion =
          hamiltonian::expand_initial_state(h, cfg.network.injection_site, cfg.network.sink_site);
      experiments::write_atomic(dir / "expansion.json", hamiltonian::to_json(expansion).dump(2) + "\n");
      const auto sweep = single_row(r, cfg);
      return finish_sweep(sweep, dir,
                          sweep.experiment + " " + network::describe(cfg.network) +
                              ": eta_inf=" + fixed(r.summary.eta_inf) + " predicted=" + fixed(r.predicted_eta),
                          true);
    }
    case Experiment::HoppingSweep: {
      const auto sweep = experiments::hopping_sweep(cfg.network, s.edge.first, s.edge.second, s.values, ctx);
      std::string line = "hopping-sweep " + sweep.axis_name + ":";
      for (const auto& row : sweep.rows) {
        line += " " + fixed(row.value, 3) + "->" + fixed(row.summary.eta_inf, 3);
      }
      return finish_sweep(sweep, dir, line, true);
    }
    case Experiment::EdgeScan: {
      const auto scan = experiments::edge_deletion_scan(cfg.network.n_sites, ctx);
      for (std::size_t k = 0; k < scan.deleted.size(); ++k) {
        const auto [a, b] = scan.deleted[k];
        experiments::write_atomic(dir / ("localization_" + std::to_string(a + 1) + "_" + std::to_string(b + 1) + ".csv"),
                                  observables::grid_csv(scan.reports[k]));
      }
      std::string line = "edge-scan N=" + std::to_string(cfg.network.n_sites) + ": eta>=0.999 for";
      for (const auto& row : scan.sweep.rows) {
        if (row.summary.eta_inf >= 0.999) line += " " + row.label;
      }
      return finish_sweep(scan.sweep, dir, line, true);
    }
    case Experiment::Dephasing: {
      const auto topologies = s.topologies.empty() ? config::defaults_for(Experiment::Dephasing).sweep.topologies
                                                   : s.topologies;
      const auto sweep = experiments::dephasing_scan(topologies, s.gammas, s.t_fixed, ctx);
      const auto at = sweep.metric_index("sink_at_t");
      std::string line = "dephasing t=" + fixed(s.t_fixed, 1) + ":";
      for (const auto& row : sweep.rows) {
        line += " " + row.label + "@" + fixed(row.value, 2) + "=" + fixed(row.metrics[at], 3);
      }
      return finish_sweep(sweep, dir, line, false);
    }
    case Experiment::Saturation: {
      const auto r =
          experiments::saturation_sweep(cfg.network, s.edge.first, s.edge.second, s.values, s.cap, s.sample_step, ctx);
      auto m = experiments::manifest(r.sweep);
      experiments::write_atomic(dir / "summary.csv", experiments::summary_csv(r.sweep));
      experiments::write_atomic(dir / "aggregate.csv", experiments::aggregate_csv(r.sweep));
      m["argmin"] = r.argmin;
      m["min_tau_s"] = r.min_tau;
      experiments::write_atomic(dir / "manifest.json", m.dump(2) + "\n");
      return {Success, "saturation: argmin " + r.sweep.axis_name + "=" + fixed(r.argmin, 2) +
                           " tau_s=" + fixed(r.min_tau, 3)};
    }
    case Experiment::Disorder: {
      const auto sweep = experiments::disorder_sweep(cfg.network, s.chis, s.realizations, cfg.seed, ctx);
      return finish_sweep(sweep, dir, ensemble_line(sweep), true);
    }
    case Experiment::TopoScan: {
      const auto topologies = s.topologies.empty()
                                  ? experiments::default_scan_topologies(cfg.network.n_sites, cfg.seed, s.per_count)
                                  : s.topologies;
      const auto r =
          experiments::dissipation_topology_scan(topologies, s.chis, s.gamma_n, s.realizations, cfg.seed, ctx);
      std::ostringstream trends;
      trends << "label,eta_at_zero,eta_at_max,ratio,relative_change,slope,group\n";
      for (const auto& t : r.trends) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "\"%s\",%.17g,%.17g,%.17g,%.17g,%.17g,%s\n", t.label.c_str(), t.eta_at_zero,
                      t.eta_at_max, t.ratio, t.relative_change, t.slope, t.group.c_str());
        trends << buf;
      }
      experiments::write_atomic(dir / "trends.csv", trends.str());
      std::string line = "topo-scan " + std::to_string(topologies.size()) + " topologies:";
      for (const auto& g : r.groups) {
        line += " " + g.group + "(" + std::to_string(g.members) + ") mean_change=" + fixed(g.mean_relative_change, 3);
      }
      return finish_sweep(r.sweep, dir, line, true);
    }
  }
  throw InvalidArgument("unhandled experiment");
}

namespace {

struct Flags {
  std::string config_file;
  std::string network;
  std::size_t injection = 0;
  std::size_t sink = 0;
  std::size_t n_sites = 0;
  std::vector<std::string> delete_edges;
  std::vector<std::string> set_edges;
  double gamma_sink = 0.0;
  double gamma_deph = 0.0;
  std::string gamma_diss;
  double t_max = 0.0;
  double rel_tol = 0.0;
  double abs_tol = 0.0;
  double sample_step = 0.0;
  std::string output_dir;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::string edge;
  std::string values;
  std::string j16_grid;
  std::string chi_grid;
  std::size_t realizations = 0;
  std::string gammas;
  double t_fixed = 0.0;
  double fraction = 0.0;
  double cap = 0.0;
  double gamma_n = 0.0;
  std::size_t per_count = 0;
  std::vector<std::string> topologies;
};

network::NetworkSpec load_network(const std::string& text) {
  if (text.rfind("fcn:", 0) == 0) {
    return config::parse_network_shorthand(text);
  }
  std::ifstream f(text);
  if (!f) {
    throw InvalidArgument("cannot read network file '" + text + "'");
  }
  try {
    return network::from_json(nlohmann::json::parse(f));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("malformed network file '" + text + "': " + e.what());
  }
}

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config_file, "JSON run configuration (flags override it)");
  app->add_option("--network", f.network, "fcn:N[~a,b...] or a network JSON file");
  app->add_option("--injection", f.injection, "Injection node (1-based)");
  app->add_option("--sink", f.sink, "Sink-coupled node (1-based)");
  app->add_option("--delete-edge", f.delete_edges, "Delete edge a,b (repeatable)");
  app->add_option("--set-edge", f.set_edges, "Set hopping a,b:weight (repeatable)");
  app->add_option("--gamma-sink", f.gamma_sink, "Sink absorption rate");
  app->add_option("--gamma-deph", f.gamma_deph, "Dephasing rate");
  app->add_option("--gamma-diss", f.gamma_diss, "Dissipation rate: one value for all sites or a comma list");
  app->add_option("--t-max", f.t_max, "Integration horizon");
  app->add_option("--rel-tol", f.rel_tol, "Integrator relative tolerance");
  app->add_option("--abs-tol", f.abs_tol, "Integrator absolute tolerance");
  app->add_option("--sample-step", f.sample_step, "Trajectory sample spacing");
  app->add_option("--fraction", f.fraction, "Saturation threshold (fraction of injected energy)");
  app->add_option("-o,--output-dir", f.output_dir, "Output directory");
  app->add_option("--seed", f.seed, "Random seed");
  app->add_option("--workers", f.workers, "Worker threads");
}

bool given(const CLI::App* app, const std::string& name) {
  const auto* opt = app->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

RunConfig build_config(Experiment e, const CLI::App* app, const Flags& f) {
  RunConfig cfg = config::defaults_for(e);
  if (!f.config_file.empty()) {
    std::ifstream in(f.config_file);
    if (!in) {
      throw InvalidArgument("cannot read config file '" + f.config_file + "'");
    }
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& ex) {
      throw InvalidArgument("malformed config file '" + f.config_file + "': " + ex.what());
    }
    if (doc.contains("experiment") && doc.at("experiment") != config::to_string(e)) {
      throw InvalidArgument("config file is for experiment '" + doc.at("experiment").get<std::string>() +
                            "', not '" + config::to_string(e) + "'");
    }
    doc["experiment"] = config::to_string(e);
    cfg = config::from_json(doc);
  }
  if (given(app, "--n-sites")) {
    cfg.network = network::complete_network(f.n_sites, 0, f.n_sites - 1);
    cfg.network_source = "fcn:" + std::to_string(f.n_sites);
  }
  if (given(app, "--network")) {
    cfg.network = load_network(f.network);
    cfg.network_source = f.network.rfind("fcn:", 0) == 0 ? f.network : "file:" + f.network;
  }
  if (given(app, "--injection")) {
    if (f.injection < 1) throw InvalidArgument("--injection is 1-based");
    cfg.network.injection_site = f.injection - 1;
  }
  if (given(app, "--sink")) {
    if (f.sink < 1) throw InvalidArgument("--sink is 1-based");
    cfg.network.sink_site = f.sink - 1;
  }
  for (const auto& d : f.delete_edges) {
    const auto [a, b] = config::parse_edge(d);
    cfg.network = network::delete_edge(cfg.network, a, b);
  }
  for (const auto& s : f.set_edges) {
    const auto ew = config::parse_edge_weight(s);
    cfg.network = network::set_hopping(cfg.network, ew.a, ew.b, ew.weight);
  }
  if (!f.delete_edges.empty() || !f.set_edges.empty()) {
    cfg.network_source = "inline";
  }
  if (given(app, "--gamma-sink")) cfg.noise.gamma_sink = f.gamma_sink;
  if (given(app, "--gamma-deph")) cfg.noise.gamma_deph = f.gamma_deph;
  if (given(app, "--gamma-diss")) {
    const auto rates = config::parse_grid(f.gamma_diss);
    cfg.noise.gamma_diss = rates.size() == 1 ? std::vector<double>(cfg.network.n_sites, rates[0]) : rates;
  }
  if (given(app, "--t-max")) cfg.integrator.t_max = f.t_max;
  if (given(app, "--rel-tol")) cfg.integrator.rel_tol = f.rel_tol;
  if (given(app, "--abs-tol")) cfg.integrator.abs_tol = f.abs_tol;
  if (given(app, "--sample-step")) {
    cfg.integrator.samples = evolve::SampleGrid::linear(f.sample_step);
    cfg.sweep.sample_step = f.sample_step;
  }
  if (given(app, "--fraction")) cfg.sweep.fraction = f.fraction;
  if (given(app, "--output-dir")) cfg.output_dir = f.output_dir;
  if (given(app, "--seed")) cfg.seed = f.seed;
  if (given(app, "--workers")) cfg.workers = f.workers;
  if (given(app, "--edge")) cfg.sweep.edge = config::parse_edge(f.edge);
  if (given(app, "--values")) cfg.sweep.values = config::parse_grid(f.values);
  if (given(app, "--j16-grid")) {
    cfg.sweep.values = config::parse_grid(f.j16_grid);
    cfg.sweep.edge = {cfg.network.injection_site, cfg.network.sink_site};
  }
  if (given(app, "--chi-grid")) cfg.sweep.chis = config::parse_grid(f.chi_grid);
  if (given(app, "--realizations")) cfg.sweep.realizations = f.realizations;
  if (given(app, "--gammas")) cfg.sweep.gammas = config::parse_grid(f.gammas);
  if (given(app, "--t-fixed")) cfg.sweep.t_fixed = f.t_fixed;
  if (given(app, "--cap")) cfg.sweep.cap = f.cap;
  if (given(app, "--gamma-n")) cfg.sweep.gamma_n = f.gamma_n;
  if (given(app, "--per-count")) cfg.sweep.per_count = f.per_count;
  if (given(app, "--topology")) {
    cfg.sweep.topologies.clear();
    for (const auto& t : f.topologies) cfg.sweep.topologies.push_back(load_network(t));
  }
  return cfg;
}

}  // namespace

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Excitation energy transport on networks: Lindblad simulations and sweeps.\n"
               "Node labels are 1-based everywhere on the command line and in files."};
  app.require_subcommand(1);
  Flags f;
  std::map<std::string, Experiment> by_name;
  std::vector<std::pair<CLI::App*, Experiment>> subs;
  auto sub = [&](Experiment e, const std::string& help) {
    CLI::App* s = app.add_subcommand(config::to_string(e), help);
    add_common(s, f);
    subs.emplace_back(s, e);
    return s;
  };
  sub(Experiment::Simulate, "Integrate one network and report populations and efficiency");
  sub(Experiment::Baseline, "Fully connected network baseline")
      ->add_option("--n-sites", f.n_sites, "Number of sites N (injection 1, sink N)");
  {
    auto* s = sub(Experiment::HoppingSweep, "Efficiency versus one hopping integral");
    s->add_option("--edge", f.edge, "Swept edge a,b");
    s->add_option("--values", f.values, "Grid start:stop:step or comma list");
  }
  sub(Experiment::EdgeScan, "Every single-edge deletion of FCN(N)")
      ->add_option("--n-sites", f.n_sites, "Number of sites N");
  {
    auto* s = sub(Experiment::Dephasing, "Sink population and saturation under dephasing");
    s->add_option("--gammas", f.gammas, "Dephasing rates (comma list or grid)");
    s->add_option("--t-fixed", f.t_fixed, "Time at which the sink population is compared");
    s->add_option("--topology", f.topologies, "Network (fcn:N[~a,b] or file), repeatable");
  }
  {
    auto* s = sub(Experiment::Saturation, "Saturation time versus the injection-sink hopping");
    s->add_option("--j16-grid", f.j16_grid, "Grid for J between injection and sink nodes");
    s->add_option("--edge", f.edge, "Swept edge a,b");
    s->add_option("--values", f.values, "Grid start:stop:step or comma list");
    s->add_option("--cap", f.cap, "Time cap; not-reached points report it");
  }
  {
    auto* s = sub(Experiment::Disorder, "Off-diagonal disorder ensembles");
    s->add_option("--chi-grid", f.chi_grid, "Disorder strengths");
    s->add_option("--realizations", f.realizations, "Realizations per strength");
  }
  {
    auto* s = sub(Experiment::TopoScan, "Disorder ensembles over a topology family with dissipation");
    s->add_option("--n-sites", f.n_sites, "Number of sites for the default family");
    s->add_option("--chi-grid", f.chi_grid, "Disorder strengths");
    s->add_option("--realizations", f.realizations, "Realizations per strength");
    s->add_option("--gamma-n", f.gamma_n, "Per-site dissipation rate");
    s->add_option("--per-count", f.per_count, "Sampled graphs per edge count in the default family");
    s->add_option("--topology", f.topologies, "Network (fcn:N[~a,b] or file), repeatable");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return Success;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return Success;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return ConfigError;
  }

  try {
    for (const auto& [s, e] : subs) {
      if (s->parsed()) {
        const RunConfig cfg = build_config(e, s, f);
        const Outcome o = run(cfg);
        out << o.summary_line << "\n";
        return o.exit_code;
      }
    }
    err << "error: no experiment selected\n";
    return ConfigError;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return NumericError;
  } catch (const InvalidArgument& e) {
    err << "config error: " << e.what() << "\n";
    return ConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return ConfigError;
  }
}

}  // namespace eet::cli
