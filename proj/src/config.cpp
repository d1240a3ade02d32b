#include "eet/config.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "eet/errors.hpp"
#include "eet/experiments.hpp"

namespace eet::config {
namespace {

struct Named {
  Experiment e;
  const char* name;
};

constexpr Named experiment_names[] = {
    {Experiment::Simulate, "simulate"},     {Experiment::Baseline, "baseline"},
    {Experiment::HoppingSweep, "hopping-sweep"}, {Experiment::EdgeScan, "edge-scan"},
    {Experiment::Dephasing, "dephasing"},   {Experiment::Saturation, "saturation"},
    {Experiment::Disorder, "disorder"},     {Experiment::TopoScan, "topo-scan"},
};

double parse_number(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("not a number: '" + text + "'");
  }
  if (used != text.size()) {
    throw InvalidArgument("not a number: '" + text + "'");
  }
  return v;
}

std::size_t parse_label(const std::string& text) {
  std::size_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || v < 1) {
    throw InvalidArgument("node labels are positive 1-based integers, got '" + text + "'");
  }
  return v - 1;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    out.push_back(item);
  }
  if (!text.empty() && text.back() == sep) {
    out.emplace_back();
  }
  return out;
}

void check_pair(const std::pair<std::size_t, std::size_t>& edge, std::size_t n, std::vector<std::string>& out) {
  if (edge.first >= n || edge.second >= n) {
    out.push_back("sweep edge out of range 1.." + std::to_string(n));
  } else if (edge.first == edge.second) {
    out.emplace_back("sweep edge must join two distinct nodes");
  }
}

}  // namespace

std::string to_string(Experiment e) {
  for (const auto& n : experiment_names) {
    if (n.e == e) {
      return n.name;
    }
  }
  return "unknown";
}

Experiment experiment_from_string(const std::string& name) {
  for (const auto& n : experiment_names) {
    if (name == n.name) {
      return n.e;
    }
  }
  throw InvalidArgument("unknown experiment '" + name + "'");
}

RunConfig defaults_for(Experiment e) {
  RunConfig cfg;
  cfg.experiment = e;
  switch (e) {
    case Experiment::HoppingSweep:
      cfg.sweep.values = parse_grid("0:2:0.05");
      break;
    case Experiment::Saturation:
      cfg.sweep.values = parse_grid("0.1:6:0.02");
      break;
    case Experiment::Dephasing: {
      const auto fcn = network::complete_network(6, 0, 5);
      cfg.sweep.topologies = {fcn, network::delete_edge(fcn, 0, 5), network::delete_edge(fcn, 1, 3),
                              network::delete_edge(fcn, 2, 5)};
      cfg.integrator.t_max = 500.0;
      cfg.integrator.samples = evolve::SampleGrid::linear(0.05);
      break;
    }
    default:
      break;
  }
  return cfg;
}

std::vector<std::string> validate_config(const RunConfig& cfg) {
  std::vector<std::string> out = network::violations(cfg.network);
  const std::size_t n = cfg.network.n_sites;
  for (auto& v : lindblad::violations(cfg.noise, n)) out.push_back(std::move(v));
  for (auto& v : evolve::violations(cfg.integrator)) out.push_back(std::move(v));
  const auto& s = cfg.sweep;
  if (cfg.workers < 1) out.emplace_back("workers must be >= 1");
  if (!(s.fraction > 0.0 && s.fraction < 1.0)) out.emplace_back("fraction must lie in (0, 1)");
  switch (cfg.experiment) {
    case Experiment::Simulate:
      break;
    case Experiment::Baseline:
    case Experiment::EdgeScan:
      if (n < 3) out.emplace_back("n_sites must be >= 3 for this experiment");
      break;
    case Experiment::HoppingSweep:
    case Experiment::Saturation:
      check_pair(s.edge, n, out);
      if (s.values.empty()) out.emplace_back("value grid must not be empty");
      if (cfg.experiment == Experiment::Saturation) {
        if (!(s.cap > 0.0)) out.emplace_back("cap must be > 0");
        if (!(s.sample_step > 0.0)) out.emplace_back("sample_step must be > 0");
      }
      break;
    case Experiment::Dephasing:
      if (s.gammas.empty()) out.emplace_back("gamma grid must not be empty");
      for (double g : s.gammas) {
        if (!(g >= 0.0)) out.emplace_back("dephasing rates must be >= 0");
      }
      if (!(s.t_fixed > 0.0 && s.t_fixed <= cfg.integrator.t_max)) out.emplace_back("t_fixed must lie in (0, t_max]");
      break;
    case Experiment::Disorder:
    case Experiment::TopoScan:
      if (s.realizations < 1) out.emplace_back("realizations must be >= 1");
      if (s.chis.empty()) out.emplace_back("chi grid must not be empty");
      for (double c : s.chis) {
        if (!(c >= 0.0)) out.emplace_back("chi must be >= 0");
      }
      if (cfg.experiment == Experiment::TopoScan) {
        if (!(s.gamma_n >= 0.0)) out.emplace_back("gamma_n must be >= 0");
        if (s.per_count < 1) out.emplace_back("per_count must be >= 1");
      }
      break;
  }
  for (const auto& t : s.topologies) {
    for (auto& v : network::violations(t)) out.push_back("topology: " + v);
  }
  return out;
}

nlohmann::json to_json(const RunConfig& cfg) {
  nlohmann::json topologies = nlohmann::json::array();
  for (const auto& t : cfg.sweep.topologies) {
    topologies.push_back(network::to_json(t));
  }
  const auto& s = cfg.sweep;
  return {{"schema_version", schema_version},
          {"experiment", to_string(cfg.experiment)},
          {"network_source", cfg.network_source},
          {"network", network::to_json(cfg.network)},
          {"noise", lindblad::to_json(cfg.noise)},
          {"integrator", evolve::to_json(cfg.integrator)},
          {"sweep",
           {{"edge", {s.edge.first + 1, s.edge.second + 1}},
            {"values", s.values},
            {"chis", s.chis},
            {"realizations", s.realizations},
            {"gammas", s.gammas},
            {"t_fixed", s.t_fixed},
            {"fraction", s.fraction},
            {"cap", s.cap},
            {"sample_step", s.sample_step},
            {"gamma_n", s.gamma_n},
            {"per_count", s.per_count},
            {"topologies", topologies}}},
          {"output_dir", cfg.output_dir},
          {"seed", cfg.seed},
          {"workers", cfg.workers}};
}

RunConfig from_json(const nlohmann::json& doc) {
  try {
    if (!doc.is_object()) {
      throw InvalidArgument("config must be a JSON object");
    }
    if (doc.contains("schema_version") && doc.at("schema_version").get<int>() != schema_version) {
      throw InvalidArgument("unsupported schema_version " + doc.at("schema_version").dump());
    }
    RunConfig cfg = defaults_for(experiment_from_string(doc.value("experiment", std::string("simulate"))));
    if (doc.contains("network")) {
      const auto& net = doc.at("network");
      if (net.is_string()) {
        cfg.network_source = net.get<std::string>();
        cfg.network = parse_network_shorthand(cfg.network_source);
      } else {
        cfg.network_source = doc.value("network_source", std::string("inline"));
        cfg.network = network::from_json(net);
      }
    }
    if (doc.contains("noise")) cfg.noise = lindblad::noise_from_json(doc.at("noise"));
    if (doc.contains("integrator")) cfg.integrator = evolve::integrator_from_json(doc.at("integrator"));
    if (doc.contains("sweep")) {
      const auto& j = doc.at("sweep");
      auto& s = cfg.sweep;
      if (j.contains("edge")) {
        const auto e = j.at("edge").get<std::vector<std::size_t>>();
        if (e.size() != 2 || e[0] < 1 || e[1] < 1) {
          throw InvalidArgument("sweep.edge must be a 1-based pair [a, b]");
        }
        s.edge = {e[0] - 1, e[1] - 1};
      }
      if (j.contains("values")) {
        s.values = j.at("values").is_string() ? parse_grid(j.at("values").get<std::string>())
                                              : j.at("values").get<std::vector<double>>();
      }
      if (j.contains("chis")) {
        s.chis = j.at("chis").is_string() ? parse_grid(j.at("chis").get<std::string>())
                                          : j.at("chis").get<std::vector<double>>();
      }
      s.realizations = j.value("realizations", s.realizations);
      if (j.contains("gammas")) s.gammas = j.at("gammas").get<std::vector<double>>();
      s.t_fixed = j.value("t_fixed", s.t_fixed);
      s.fraction = j.value("fraction", s.fraction);
      s.cap = j.value("cap", s.cap);
      s.sample_step = j.value("sample_step", s.sample_step);
      s.gamma_n = j.value("gamma_n", s.gamma_n);
      s.per_count = j.value("per_count", s.per_count);
      if (j.contains("topologies")) {
        s.topologies.clear();
        for (const auto& t : j.at("topologies")) {
          s.topologies.push_back(t.is_string() ? parse_network_shorthand(t.get<std::string>()) : network::from_json(t));
        }
      }
    }
    cfg.output_dir = doc.value("output_dir", cfg.output_dir);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.workers = doc.value("workers", cfg.workers);
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed config: ") + e.what());
  }
}

std::string digest(const RunConfig& cfg) {
  nlohmann::json doc = to_json(cfg);
  doc.erase("output_dir");
  doc.erase("workers");
  doc.erase("network_source");
  return experiments::config_digest(doc);
}

std::vector<double> parse_grid(const std::string& text) {
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) {
      throw InvalidArgument("grid must be start:stop:step, got '" + text + "'");
    }
    const double start = parse_number(parts[0]);
    const double stop = parse_number(parts[1]);
    const double step = parse_number(parts[2]);
    if (!(step > 0.0) || stop < start) {
      throw InvalidArgument("grid needs step > 0 and stop >= start: '" + text + "'");
    }
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
    std::vector<double> out;
    out.reserve(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
      // Rounded to 12 significant decimals so 0.1 + k*0.02 prints as written.
      const double v = start + static_cast<double>(k) * step;
      out.push_back(std::round(v * 1e12) / 1e12);
    }
    return out;
  }
  std::vector<double> out;
  for (const auto& item : split(text, ',')) {
    out.push_back(parse_number(item));
  }
  if (out.empty()) {
    throw InvalidArgument("empty grid");
  }
  return out;
}

network::NetworkSpec parse_network_shorthand(const std::string& text) {
  if (text.rfind("fcn:", 0) != 0) {
    throw InvalidArgument("unknown network shorthand '" + text + "' (expected fcn:N[~a,b...] or a network file)");
  }
  const auto parts = split(text.substr(4), '~');
  const std::size_t n = parse_label(parts.at(0)) + 1;
  if (n < 2) {
    throw InvalidArgument("fcn:N needs N >= 2");
  }
  auto spec = network::complete_network(n, 0, n - 1);
  for (std::size_t k = 1; k < parts.size(); ++k) {
    const auto [a, b] = parse_edge(parts[k]);
    spec = network::delete_edge(spec, a, b);
  }
  return spec;
}

std::pair<std::size_t, std::size_t> parse_edge(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 2) {
    throw InvalidArgument("edge must be 'a,b', got '" + text + "'");
  }
  return {parse_label(parts[0]), parse_label(parts[1])};
}

EdgeWeight parse_edge_weight(const std::string& text) {
  const auto colon = text.find(':');
  const auto [a, b] = parse_edge(text.substr(0, colon));
  const double w = colon == std::string::npos ? 1.0 : parse_number(text.substr(colon + 1));
  return {a, b, w};
}

}  // namespace eet::config
