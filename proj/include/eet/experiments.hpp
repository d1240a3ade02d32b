#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "eet/evolve.hpp"
#include "eet/lindblad.hpp"
#include "eet/network.hpp"
#include "eet/observables.hpp"
#include "eet/parallel.hpp"

namespace eet::experiments {

/// Settings shared by every experiment.
struct RunContext {
  lindblad::NoiseConfig noise;
  evolve::IntegratorConfig integrator;
  /// Threshold for saturation times, as a fraction of the injected energy.
  double fraction = 0.99;
  std::size_t workers = 1;
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const RunContext& ctx);

/// One simulated point (and realization, for ensembles).
struct SweepRow {
  std::size_t point = 0;
  std::size_t realization = 0;
  std::string label;
  double value = 0.0;
  observables::RunSummary summary;
  /// Experiment-specific numbers, same names in every row of a sweep.
  std::vector<double> metrics;
};

struct Aggregate {
  std::size_t point = 0;
  std::string label;
  double value = 0.0;
  std::size_t count = 0;
  double mean_eta = 0.0;
  double stddev_eta = 0.0;  // sample standard deviation (n - 1)
  double sem_eta = 0.0;     // stddev / sqrt(n)
};

struct SweepResult {
  std::string experiment;
  std::string axis_name;
  std::vector<std::string> metric_names;
  std::vector<SweepRow> rows;
  std::vector<Aggregate> aggregates;
  /// Full configuration, enough to re-run the experiment.
  nlohmann::json parameters;
  std::string config_digest;
  std::uint64_t seed = 0;

  std::size_t metric_index(const std::string& name) const;
  /// Rows of one point, in realization order.
  std::vector<const SweepRow*> rows_at(std::size_t point) const;
  bool all_converged() const;
};

/// Aggregates per point, in order of first appearance.
std::vector<Aggregate> compute_aggregates(const std::vector<SweepRow>& rows);

/// Stable 64-bit FNV-1a digest of the canonical (key-sorted) JSON dump, as hex.
std::string config_digest(const nlohmann::json& config);

// ---------------------------------------------------------------------------

struct BaselineResult {
  network::NetworkSpec spec;
  evolve::Trajectory trajectory;
  observables::RunSummary summary;
  observables::LocalizationReport localization;
  double predicted_eta = 0.0;
};

/// Fully connected network, injection at node 1, sink at node N.
BaselineResult fcn_baseline(std::size_t n_sites, const RunContext& ctx);

/// Same analysis on an arbitrary network.
BaselineResult simulate(const network::NetworkSpec& spec, const RunContext& ctx);

/// Steady-state efficiency while J_ab takes each value. Metrics: predicted_eta.
SweepResult hopping_sweep(const network::NetworkSpec& base, std::size_t a, std::size_t b,
                          const std::vector<double>& values, const RunContext& ctx);

struct EdgeScanResult {
  SweepResult sweep;
  std::vector<std::pair<std::size_t, std::size_t>> deleted;
  std::vector<observables::LocalizationReport> reports;
};

/// Every single-edge deletion of FCN(N). Metrics: predicted_eta, dark_dimension, off_sink_entries.
EdgeScanResult edge_deletion_scan(std::size_t n_sites, const RunContext& ctx);

/// Sink population at t_fixed and time to ctx.fraction for every
/// (topology, gamma_deph). Metrics: sink_at_t, time_to_fraction, time_to_fraction_reached.
SweepResult dephasing_scan(const std::vector<network::NetworkSpec>& topologies, const std::vector<double>& gammas,
                           double t_fixed, const RunContext& ctx);

struct SaturationResult {
  SweepResult sweep;
  double argmin = 0.0;
  double min_tau = 0.0;
};

/// Saturation time against J_ab (default edge (1, N) of FCN(N)); trajectories
/// run to `cap` sampled every `sample_step`.
SaturationResult saturation_sweep(const network::NetworkSpec& base, std::size_t a, std::size_t b,
                                  const std::vector<double>& values, double cap, double sample_step,
                                  const RunContext& ctx);

/// Off-diagonal disorder ensemble: R realizations per chi, all keyed by seed.
SweepResult disorder_sweep(const network::NetworkSpec& spec, const std::vector<double>& chis, std::size_t realizations,
                           std::uint64_t seed, const RunContext& ctx);

struct TopologyTrend {
  std::string label;
  double eta_at_zero = 0.0;
  double eta_at_max = 0.0;
  double ratio = 0.0;
  double relative_change = 0.0;
  /// Least-squares slope of mean eta against chi.
  double slope = 0.0;
  std::string group;  // "high", "low" or "intermediate"
};

struct GroupTrend {
  std::string group;
  std::size_t members = 0;
  double mean_relative_change = 0.0;
  double min_relative_change = 0.0;
  double max_relative_change = 0.0;
};

struct TopologyScanResult {
  SweepResult sweep;
  std::vector<TopologyTrend> trends;
  std::vector<GroupTrend> groups;
};

inline constexpr double high_baseline_threshold = 0.8;
inline constexpr double low_baseline_threshold = 0.4;

/// Disorder ensembles on each topology with per-site dissipation gamma_n
/// (ctx.noise.gamma_deph stays as configured).
TopologyScanResult dissipation_topology_scan(const std::vector<network::NetworkSpec>& topologies,
                                             const std::vector<double>& chis, double gamma_n,
                                             std::size_t realizations, std::uint64_t seed, const RunContext& ctx);

/// FCN, FCN without the injection-sink edge, plus three sampled graphs for
/// each edge count from N to binomial(N,2) - 1 (28 networks at N = 6).
std::vector<network::NetworkSpec> default_scan_topologies(std::size_t n_sites, std::uint64_t seed,
                                                          std::size_t per_count = 3);

// ---------------------------------------------------------------------------

std::string summary_csv(const SweepResult& result);
std::string aggregate_csv(const SweepResult& result);
nlohmann::json manifest(const SweepResult& result);

/// Writes contents to path through a temporary file and rename.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

/// summary.csv, aggregate.csv and manifest.json under dir.
void write_outputs(const SweepResult& result, const std::filesystem::path& dir);

}  // namespace eet::experiments
