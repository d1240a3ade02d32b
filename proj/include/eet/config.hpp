#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "eet/evolve.hpp"
#include "eet/lindblad.hpp"
#include "eet/network.hpp"

namespace eet::config {

inline constexpr int schema_version = 1;

enum class Experiment { Simulate, Baseline, HoppingSweep, EdgeScan, Dephasing, Saturation, Disorder, TopoScan };

std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& name);

/// Experiment parameters. Node pairs are 0-based here, 1-based in files.
struct SweepParams {
  std::pair<std::size_t, std::size_t> edge{0, 5};
  std::vector<double> values;
  std::vector<double> chis{0.0, 0.1, 0.2, 0.3};
  std::size_t realizations = 200;
  std::vector<double> gammas{0.0, 0.01, 0.1, 1.0};
  double t_fixed = 100.0;
  double fraction = 0.99;
  double cap = 500.0;
  double sample_step = 0.01;
  double gamma_n = 0.01;
  std::size_t per_count = 3;
  /// Explicit topology family; empty selects the experiment default.
  std::vector<network::NetworkSpec> topologies;
};

struct RunConfig {
  Experiment experiment = Experiment::Simulate;
  /// How the network was specified ("fcn:6", "file:<path>", "inline"); informational.
  std::string network_source = "fcn:6";
  network::NetworkSpec network = network::complete_network(6, 0, 5);
  lindblad::NoiseConfig noise;
  evolve::IntegratorConfig integrator;
  SweepParams sweep;
  std::string output_dir = "eet-output";
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

/// Default configuration for an experiment.
RunConfig defaults_for(Experiment e);

/// Every violated invariant; empty when the config is runnable.
std::vector<std::string> validate_config(const RunConfig& cfg);

/// Lossless JSON form (network written out in full, 1-based labels).
nlohmann::json to_json(const RunConfig& cfg);
/// Missing fields take defaults_for(experiment).
RunConfig from_json(const nlohmann::json& doc);

/// Digest over the fields that influence results (not output_dir or workers).
std::string digest(const RunConfig& cfg);

/// "start:stop:step" inclusive grid, or a comma separated list.
std::vector<double> parse_grid(const std::string& text);

/// "fcn:N" shorthand (injection 1, sink N); each "~a,b" suffix deletes an
/// edge, e.g. "fcn:6~1,6".
network::NetworkSpec parse_network_shorthand(const std::string& text);

/// "a,b" 1-based pair -> 0-based.
std::pair<std::size_t, std::size_t> parse_edge(const std::string& text);

struct EdgeWeight {
  std::size_t a = 0;
  std::size_t b = 0;
  double weight = 1.0;
};
/// "a,b[:weight]" 1-based -> 0-based.
EdgeWeight parse_edge_weight(const std::string& text);

}  // namespace eet::config
