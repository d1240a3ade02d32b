#include "eet/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "eet/errors.hpp"
#include "eet/hamiltonian.hpp"

namespace eet::experiments {
namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string edge_label(std::size_t a, std::size_t b) {
  return "(" + std::to_string(a + 1) + "," + std::to_string(b + 1) + ")";
}

ComplexMatrix injected(const lindblad::LindbladModel& model, const network::NetworkSpec& spec) {
  return lindblad::site_state(model, spec.injection_site);
}

observables::RunSummary steady_summary(const network::NetworkSpec& spec, const lindblad::NoiseConfig& noise,
                                       const RunContext& ctx, ComplexMatrix* final_state = nullptr) {
  const auto model = lindblad::build_model(spec, noise);
  const auto steady = evolve::find_steady_state(model, injected(model, spec), ctx.integrator);
  if (final_state) {
    *final_state = steady.state;
  }
  return observables::summarize(steady, model.layout);
}

void finish(SweepResult& result, const RunContext& ctx, nlohmann::json params) {
  params["context"] = to_json(ctx);
  params["experiment"] = result.experiment;
  result.parameters = std::move(params);
  result.config_digest = config_digest(result.parameters);
  result.seed = ctx.seed;
  for (auto& row : result.rows) {
    row.summary.config_digest = result.config_digest;
    row.summary.seed = result.seed;
  }
  result.aggregates = compute_aggregates(result.rows);
}

nlohmann::json specs_json(const std::vector<network::NetworkSpec>& specs) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& s : specs) {
    out.push_back(network::to_json(s));
  }
  return out;
}

}  // namespace

nlohmann::json to_json(const RunContext& ctx) {
  return {{"noise", lindblad::to_json(ctx.noise)},
          {"integrator", evolve::to_json(ctx.integrator)},
          {"fraction", ctx.fraction},
          {"seed", ctx.seed}};
}

std::size_t SweepResult::metric_index(const std::string& name) const {
  const auto it = std::find(metric_names.begin(), metric_names.end(), name);
  if (it == metric_names.end()) {
    throw InvalidArgument("unknown metric '" + name + "' in " + experiment);
  }
  return static_cast<std::size_t>(it - metric_names.begin());
}

std::vector<const SweepRow*> SweepResult::rows_at(std::size_t point) const {
  std::vector<const SweepRow*> out;
  for (const auto& row : rows) {
    if (row.point == point) {
      out.push_back(&row);
    }
  }
  return out;
}

bool SweepResult::all_converged() const {
  return std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.summary.converged; });
}

std::vector<Aggregate> compute_aggregates(const std::vector<SweepRow>& rows) {
  std::vector<Aggregate> out;
  std::vector<std::vector<double>> samples;
  for (const auto& row : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const Aggregate& a) { return a.point == row.point; });
    if (it == out.end()) {
      out.push_back({row.point, row.label, row.value, 0, 0.0, 0.0, 0.0});
      samples.emplace_back();
      it = out.end() - 1;
    }
    samples[static_cast<std::size_t>(it - out.begin())].push_back(row.summary.eta_inf);
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto& xs = samples[k];
    const auto n = static_cast<double>(xs.size());
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double mean = sum / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    out[k].count = xs.size();
    out[k].mean_eta = mean;
    out[k].stddev_eta = xs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    out[k].sem_eta = out[k].stddev_eta / std::sqrt(n);
  }
  return out;
}

std::string config_digest(const nlohmann::json& config) {
  const std::string text = config.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

BaselineResult simulate(const network::NetworkSpec& spec, const RunContext& ctx) {
  BaselineResult out;
  out.spec = spec;
  const auto model = lindblad::build_model(spec, ctx.noise);
  out.trajectory = evolve::integrate(model, injected(model, spec), ctx.integrator);
  out.summary = observables::summarize(out.trajectory, ctx.integrator, ctx.fraction, ctx.integrator.t_max);
  out.localization = observables::localization_report(out.trajectory.final_state, model.layout);
  const auto h = hamiltonian::build_hamiltonian(spec);
  out.predicted_eta = hamiltonian::predicted_efficiency(h, spec.injection_site, spec.sink_site);
  nlohmann::json params{{"network", network::to_json(spec)}, {"context", to_json(ctx)}};
  out.summary.config_digest = config_digest(params);
  out.summary.seed = ctx.seed;
  return out;
}

BaselineResult fcn_baseline(std::size_t n_sites, const RunContext& ctx) {
  if (n_sites < 3) {
    throw InvalidArgument("fcn_baseline: need N >= 3");
  }
  return simulate(network::complete_network(n_sites, 0, n_sites - 1), ctx);
}

SweepResult hopping_sweep(const network::NetworkSpec& base, std::size_t a, std::size_t b,
                          const std::vector<double>& values, const RunContext& ctx) {
  if (values.empty()) {
    throw InvalidArgument("hopping_sweep: empty value grid");
  }
  network::set_hopping(base, a, b, 1.0);  // index validation
  SweepResult result;
  result.experiment = "hopping-sweep";
  result.axis_name = "J" + edge_label(a, b);
  result.metric_names = {"predicted_eta"};
  result.rows = parallel_map(values.size(), ctx.workers, [&](std::size_t i) {
    const auto spec = network::set_hopping(base, a, b, values[i]);
    SweepRow row;
    row.point = i;
    row.label = network::describe(spec);
    row.value = values[i];
    row.summary = steady_summary(spec, ctx.noise, ctx);
    const auto h = hamiltonian::build_hamiltonian(spec);
    row.metrics = {hamiltonian::predicted_efficiency(h, spec.injection_site, spec.sink_site)};
    return row;
  });
  finish(result, ctx,
         {{"network", network::to_json(base)}, {"edge", {a + 1, b + 1}}, {"values", values}});
  return result;
}

EdgeScanResult edge_deletion_scan(std::size_t n_sites, const RunContext& ctx) {
  if (n_sites < 3) {
    throw InvalidArgument("edge_deletion_scan: need N >= 3");
  }
  const auto base = network::complete_network(n_sites, 0, n_sites - 1);
  EdgeScanResult out;
  out.deleted = base.edges();
  struct Point {
    SweepRow row;
    observables::LocalizationReport report;
  };
  auto points = parallel_map(out.deleted.size(), ctx.workers, [&](std::size_t i) {
    const auto [a, b] = out.deleted[i];
    const auto spec = network::delete_edge(base, a, b);
    const auto model = lindblad::build_model(spec, ctx.noise);
    Point p;
    ComplexMatrix final_state;
    p.row.point = i;
    p.row.label = edge_label(a, b);
    p.row.value = static_cast<double>(i);
    p.row.summary = steady_summary(spec, ctx.noise, ctx, &final_state);
    p.report = observables::localization_report(final_state, model.layout);
    const auto h = hamiltonian::build_hamiltonian(spec);
    p.row.metrics = {hamiltonian::predicted_efficiency(h, spec.injection_site, spec.sink_site),
                     static_cast<double>(hamiltonian::dark_dimension(h, spec.sink_site)),
                     static_cast<double>(p.report.off_sink_entries)};
    return p;
  });
  out.sweep.experiment = "edge-scan";
  out.sweep.axis_name = "deleted_edge";
  out.sweep.metric_names = {"predicted_eta", "dark_dimension", "off_sink_entries"};
  for (auto& p : points) {
    out.sweep.rows.push_back(std::move(p.row));
    out.reports.push_back(std::move(p.report));
  }
  finish(out.sweep, ctx, {{"n_sites", n_sites}});
  return out;
}

SweepResult dephasing_scan(const std::vector<network::NetworkSpec>& topologies, const std::vector<double>& gammas,
                           double t_fixed, const RunContext& ctx) {
  if (topologies.empty() || gammas.empty()) {
    throw InvalidArgument("dephasing_scan: need at least one topology and one rate");
  }
  for (double g : gammas) {
    if (!(g >= 0.0)) {
      throw InvalidArgument("dephasing_scan: dephasing rates must be >= 0");
    }
  }
  if (!(t_fixed > 0.0 && t_fixed <= ctx.integrator.t_max)) {
    throw InvalidArgument("dephasing_scan: t_fixed must lie in (0, t_max]");
  }
  SweepResult result;
  result.experiment = "dephasing";
  result.axis_name = "gamma_deph";
  result.metric_names = {"sink_at_t", "time_to_fraction", "time_to_fraction_reached"};
  const std::size_t count = topologies.size() * gammas.size();
  result.rows = parallel_map(count, ctx.workers, [&](std::size_t i) {
    const auto& spec = topologies[i / gammas.size()];
    const double gamma = gammas[i % gammas.size()];
    lindblad::NoiseConfig noise = ctx.noise;
    noise.gamma_deph = gamma;
    evolve::IntegratorConfig cfg = ctx.integrator;
    auto times = cfg.samples.resolve(cfg.t_max);
    times.push_back(t_fixed);
    cfg.samples = evolve::SampleGrid::explicit_times(std::move(times));
    const auto model = lindblad::build_model(spec, noise);
    const auto traj = evolve::integrate(model, injected(model, spec), cfg);
    SweepRow row;
    row.point = i;
    row.label = network::describe(spec);
    row.value = gamma;
    row.summary = observables::summarize(traj, cfg, ctx.fraction, cfg.t_max);
    const auto at = std::find(traj.times.begin(), traj.times.end(), t_fixed);
    const double sink_at_t = traj.populations[static_cast<std::size_t>(at - traj.times.begin())][model.layout.sink()];
    row.metrics = {sink_at_t, row.summary.tau_s->value, row.summary.tau_s->reached ? 1.0 : 0.0};
    return row;
  });
  finish(result, ctx, {{"topologies", specs_json(topologies)}, {"gammas", gammas}, {"t_fixed", t_fixed}});
  return result;
}

SaturationResult saturation_sweep(const network::NetworkSpec& base, std::size_t a, std::size_t b,
                                  const std::vector<double>& values, double cap, double sample_step,
                                  const RunContext& ctx) {
  if (values.empty()) {
    throw InvalidArgument("saturation_sweep: empty value grid");
  }
  if (!(cap > 0.0) || !(sample_step > 0.0)) {
    throw InvalidArgument("saturation_sweep: cap and sample step must be > 0");
  }
  network::set_hopping(base, a, b, 1.0);
  evolve::IntegratorConfig cfg = ctx.integrator;
  cfg.t_max = cap;
  cfg.samples = evolve::SampleGrid::linear(sample_step);
  SaturationResult out;
  out.sweep.experiment = "saturation";
  out.sweep.axis_name = "J" + edge_label(a, b);
  out.sweep.rows = parallel_map(values.size(), ctx.workers, [&](std::size_t i) {
    const auto spec = network::set_hopping(base, a, b, values[i]);
    const auto model = lindblad::build_model(spec, ctx.noise);
    const auto traj = evolve::integrate(model, injected(model, spec), cfg);
    SweepRow row;
    row.point = i;
    row.label = network::describe(spec);
    row.value = values[i];
    row.summary = observables::summarize(traj, cfg, ctx.fraction, cap);
    return row;
  });
  out.min_tau = std::numeric_limits<double>::infinity();
  for (const auto& row : out.sweep.rows) {
    if (row.summary.tau_s->reached && row.summary.tau_s->value < out.min_tau) {
      out.min_tau = row.summary.tau_s->value;
      out.argmin = row.value;
    }
  }
  finish(out.sweep, ctx,
         {{"network", network::to_json(base)},
          {"edge", {a + 1, b + 1}},
          {"values", values},
          {"cap", cap},
          {"sample_step", sample_step}});
  return out;
}

SweepResult disorder_sweep(const network::NetworkSpec& spec, const std::vector<double>& chis, std::size_t realizations,
                           std::uint64_t seed, const RunContext& ctx) {
  if (realizations < 1 || chis.empty()) {
    throw InvalidArgument("disorder_sweep: need R >= 1 and a non-empty chi grid");
  }
  SweepResult result;
  result.experiment = "disorder";
  result.axis_name = "chi";
  const std::size_t count = chis.size() * realizations;
  result.rows = parallel_map(count, ctx.workers, [&](std::size_t i) {
    const std::size_t point = i / realizations;
    const std::size_t r = i % realizations;
    const network::DisorderConfig dis{chis[point], seed, realizations};
    const auto disordered = network::apply_disorder(spec, dis, r);
    SweepRow row;
    row.point = point;
    row.realization = r;
    row.label = network::describe(spec);
    row.value = chis[point];
    row.summary = steady_summary(disordered, ctx.noise, ctx);
    return row;
  });
  RunContext seeded = ctx;
  seeded.seed = seed;
  finish(result, seeded,
         {{"network", network::to_json(spec)}, {"chis", chis}, {"realizations", realizations}});
  return result;
}

TopologyScanResult dissipation_topology_scan(const std::vector<network::NetworkSpec>& topologies,
                                             const std::vector<double>& chis, double gamma_n,
                                             std::size_t realizations, std::uint64_t seed, const RunContext& ctx) {
  if (topologies.empty() || chis.empty() || realizations < 1) {
    throw InvalidArgument("dissipation_topology_scan: need topologies, a chi grid and R >= 1");
  }
  if (!(gamma_n >= 0.0)) {
    throw InvalidArgument("dissipation_topology_scan: gamma_n must be >= 0");
  }
  for (const auto& t : topologies) {
    if (!network::injection_reaches_sink(t)) {
      throw InvalidArgument("dissipation_topology_scan: topology " + network::describe(t) +
                            " does not connect injection to sink");
    }
  }
  TopologyScanResult out;
  auto& result = out.sweep;
  result.experiment = "topo-scan";
  result.axis_name = "chi";
  const std::size_t per_topology = chis.size() * realizations;
  result.rows = parallel_map(topologies.size() * per_topology, ctx.workers, [&](std::size_t i) {
    const std::size_t topo = i / per_topology;
    const std::size_t c = (i % per_topology) / realizations;
    const std::size_t r = i % realizations;
    const auto& spec = topologies[topo];
    lindblad::NoiseConfig noise = ctx.noise;
    noise.gamma_diss.assign(spec.n_sites, gamma_n);
    const network::DisorderConfig dis{chis[c], seed, realizations};
    SweepRow row;
    row.point = topo * chis.size() + c;
    row.realization = r;
    row.label = network::describe(spec);
    row.value = chis[c];
    row.summary = steady_summary(network::apply_disorder(spec, dis, r), noise, ctx);
    return row;
  });
  RunContext seeded = ctx;
  seeded.seed = seed;
  finish(result, seeded,
         {{"topologies", specs_json(topologies)},
          {"chis", chis},
          {"gamma_n", gamma_n},
          {"realizations", realizations}});

  for (std::size_t topo = 0; topo < topologies.size(); ++topo) {
    std::vector<double> means;
    for (std::size_t c = 0; c < chis.size(); ++c) {
      means.push_back(result.aggregates[topo * chis.size() + c].mean_eta);
    }
    TopologyTrend trend;
    trend.label = network::describe(topologies[topo]);
    trend.eta_at_zero = means.front();
    trend.eta_at_max = means.back();
    trend.ratio = trend.eta_at_zero > 0.0 ? trend.eta_at_max / trend.eta_at_zero : 0.0;
    trend.relative_change = trend.eta_at_zero > 0.0 ? trend.ratio - 1.0 : 0.0;
    double mx = 0.0, my = 0.0;
    for (std::size_t c = 0; c < chis.size(); ++c) {
      mx += chis[c];
      my += means[c];
    }
    mx /= static_cast<double>(chis.size());
    my /= static_cast<double>(chis.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t c = 0; c < chis.size(); ++c) {
      sxy += (chis[c] - mx) * (means[c] - my);
      sxx += (chis[c] - mx) * (chis[c] - mx);
    }
    trend.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    trend.group = trend.eta_at_zero >= high_baseline_threshold ? "high"
                  : trend.eta_at_zero < low_baseline_threshold ? "low"
                                                                : "intermediate";
    out.trends.push_back(trend);
  }
  for (const char* name : {"high", "intermediate", "low"}) {
    GroupTrend g;
    g.group = name;
    g.min_relative_change = std::numeric_limits<double>::infinity();
    g.max_relative_change = -std::numeric_limits<double>::infinity();
    for (const auto& t : out.trends) {
      if (t.group == name) {
        ++g.members;
        g.mean_relative_change += t.relative_change;
        g.min_relative_change = std::min(g.min_relative_change, t.relative_change);
        g.max_relative_change = std::max(g.max_relative_change, t.relative_change);
      }
    }
    if (g.members > 0) {
      g.mean_relative_change /= static_cast<double>(g.members);
    } else {
      g.min_relative_change = g.max_relative_change = 0.0;
    }
    out.groups.push_back(g);
  }
  return out;
}

std::vector<network::NetworkSpec> default_scan_topologies(std::size_t n_sites, std::uint64_t seed,
                                                          std::size_t per_count) {
  if (n_sites < 3 || per_count < 1) {
    throw InvalidArgument("default_scan_topologies: need N >= 3 and per_count >= 1");
  }
  const std::size_t injection = 0;
  const std::size_t sink = n_sites - 1;
  const std::size_t max_edges = n_sites * (n_sites - 1) / 2;
  network::TopologyQuery query{n_sites, injection, sink, {}, per_count, seed};
  for (std::size_t k = n_sites; k + 1 < max_edges; ++k) {
    query.edge_counts.push_back(k);
  }
  auto out = network::enumerate_topologies(query);

  const auto fcn = network::complete_network(n_sites, injection, sink);
  const auto cut = network::delete_edge(fcn, injection, sink);
  out.push_back(cut);
  query.edge_counts = {max_edges - 1};
  query.per_count = 0;
  auto near_complete = n_sites <= network::exhaustive_limit
                           ? network::enumerate_topologies(query)
                           : std::vector<network::NetworkSpec>{};
  std::size_t added = 1;
  for (const auto& g : near_complete) {
    if (added >= per_count) break;
    if (!(g == cut)) {
      out.push_back(g);
      ++added;
    }
  }
  out.push_back(fcn);
  return out;
}

std::string summary_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "point,label," << result.axis_name
      << ",realization,eta_inf,tau_s,tau_s_reached,residual_network,residual_ground,converged";
  for (const auto& m : result.metric_names) {
    out << ',' << m;
  }
  out << '\n';
  for (const auto& row : result.rows) {
    const auto& s = row.summary;
    out << row.point << ",\"" << row.label << "\"," << format_double(row.value) << ',' << row.realization << ','
        << format_double(s.eta_inf) << ',' << (s.tau_s ? format_double(s.tau_s->value) : "") << ','
        << (s.tau_s ? (s.tau_s->reached ? "1" : "0") : "") << ',' << format_double(s.residual_network_population)
        << ',' << format_double(s.residual_ground_population) << ',' << (s.converged ? 1 : 0);
    for (double m : row.metrics) {
      out << ',' << format_double(m);
    }
    out << '\n';
  }
  return out.str();
}

std::string aggregate_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "point,label," << result.axis_name << ",count,mean_eta,stddev_eta,sem_eta\n";
  for (const auto& a : result.aggregates) {
    out << a.point << ",\"" << a.label << "\"," << format_double(a.value) << ',' << a.count << ','
        << format_double(a.mean_eta) << ',' << format_double(a.stddev_eta) << ',' << format_double(a.sem_eta)
        << '\n';
  }
  return out.str();
}

nlohmann::json manifest(const SweepResult& result) {
  const auto now = std::chrono::system_clock::now();
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
  return {{"schema_version", 1},
          {"experiment", result.experiment},
          {"config", result.parameters},
          {"config_digest", result.config_digest},
          {"seed", result.seed},
          {"rows", result.rows.size()},
          {"all_converged", result.all_converged()},
          {"summary_digest", config_digest(nlohmann::json(summary_csv(result)))},
          {"timestamp", secs}};
}

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) {
      throw InvalidArgument("cannot write " + tmp.string());
    }
    f << contents;
    f.flush();
    if (!f) {
      throw InvalidArgument("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw InvalidArgument("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

void write_outputs(const SweepResult& result, const std::filesystem::path& dir) {
  write_atomic(dir / "summary.csv", summary_csv(result));
  write_atomic(dir / "aggregate.csv", aggregate_csv(result));
  write_atomic(dir / "manifest.json", manifest(result).dump(2) + "\n");
}

}  // namespace eet::experiments
