#include "eet/network.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <set>
#include <sstream>

#include "eet/errors.hpp"

namespace eet::network {
namespace {

void check_index(const NetworkSpec& spec, std::size_t i, const char* what) {
  if (i >= spec.n_sites) {
    std::ostringstream msg;
    msg << what << ": node index " << i + 1 << " out of range 1.." << spec.n_sites;
    throw InvalidArgument(msg.str());
  }
}

void check_pair(const NetworkSpec& spec, std::size_t a, std::size_t b, const char* what) {
  check_index(spec, a, what);
  check_index(spec, b, what);
  if (a == b) {
    std::ostringstream msg;
    msg << what << ": self-loop on node " << a + 1 << " is not allowed";
    throw InvalidArgument(msg.str());
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t keyed_hash(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  return splitmix64(h ^ c);
}

// Pair (i < j) of relabeled positions -> bit index.
std::size_t pair_bit(std::size_t i, std::size_t j, std::size_t n) {
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

// Position p in the code refers to node order[p]; order = {injection, sink, others...}.
std::uint64_t encode(const std::vector<std::vector<bool>>& adj, const std::vector<std::size_t>& order) {
  const std::size_t n = order.size();
  std::uint64_t code = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (adj[order[i]][order[j]]) {
        code |= std::uint64_t{1} << pair_bit(i, j, n);
      }
    }
  }
  return code;
}

std::vector<std::size_t> others(std::size_t n, std::size_t injection, std::size_t sink) {
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < n; ++i) {
    if (i != injection && i != sink) {
      rest.push_back(i);
    }
  }
  return rest;
}

// Minimum code over relabelings that keep injection and sink fixed.
std::uint64_t canonical_code(const std::vector<std::vector<bool>>& adj, std::size_t injection, std::size_t sink) {
  std::vector<std::size_t> rest = others(adj.size(), injection, sink);
  std::uint64_t best = ~std::uint64_t{0};
  std::vector<std::size_t> order(adj.size());
  do {
    order[0] = injection;
    order[1] = sink;
    std::copy(rest.begin(), rest.end(), order.begin() + 2);
    best = std::min(best, encode(adj, order));
  } while (std::next_permutation(rest.begin(), rest.end()));
  return best;
}

NetworkSpec decode(std::uint64_t code, std::size_t n, std::size_t injection, std::size_t sink) {
  std::vector<std::size_t> order{injection, sink};
  const auto rest = others(n, injection, sink);
  order.insert(order.end(), rest.begin(), rest.end());
  NetworkSpec spec;
  spec.n_sites = n;
  spec.hopping = RealMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  spec.site_energies.assign(n, 1.0);
  spec.injection_site = injection;
  spec.sink_site = sink;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (code & (std::uint64_t{1} << pair_bit(i, j, n))) {
        const auto a = static_cast<Eigen::Index>(order[i]);
        const auto b = static_cast<Eigen::Index>(order[j]);
        spec.hopping(a, b) = spec.hopping(b, a) = 1.0;
      }
    }
  }
  return spec;
}

std::vector<std::vector<bool>> adjacency_of(const NetworkSpec& spec) {
  std::vector<std::vector<bool>> adj(spec.n_sites, std::vector<bool>(spec.n_sites, false));
  for (auto [a, b] : spec.edges()) {
    adj[a][b] = adj[b][a] = true;
  }
  return adj;
}

std::vector<std::size_t> component_of(const NetworkSpec& spec, std::size_t start) {
  std::vector<std::size_t> label(spec.n_sites, 0);
  std::vector<std::size_t> stack{start};
  label[start] = 1;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (std::size_t w = 0; w < spec.n_sites; ++w) {
      if (!label[w] && spec.hopping(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(w)) != 0.0) {
        label[w] = 1;
        stack.push_back(w);
      }
    }
  }
  return label;
}

std::size_t binomial2(std::size_t n) { return n * (n - 1) / 2; }

}  // namespace

std::size_t NetworkSpec::edge_count() const { return edges().size(); }

std::vector<std::pair<std::size_t, std::size_t>> NetworkSpec::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t a = 0; a < n_sites; ++a) {
    for (std::size_t b = a + 1; b < n_sites; ++b) {
      if (hopping(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) != 0.0) {
        out.emplace_back(a, b);
      }
    }
  }
  return out;
}

std::vector<std::string> violations(const NetworkSpec& spec) {
  std::vector<std::string> out;
  const auto n = static_cast<Eigen::Index>(spec.n_sites);
  if (spec.n_sites < 1) {
    out.emplace_back("n_sites must be >= 1");
    return out;
  }
  if (spec.hopping.rows() != n || spec.hopping.cols() != n) {
    out.emplace_back("hopping matrix must be n_sites x n_sites");
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (spec.hopping(i, i) != 0.0) {
        out.push_back("hopping diagonal must be zero at node " + std::to_string(i + 1));
      }
      for (Eigen::Index j = i + 1; j < n; ++j) {
        if (spec.hopping(i, j) != spec.hopping(j, i)) {
          out.push_back("hopping must be symmetric at (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) + ")");
        }
      }
    }
  }
  if (spec.site_energies.size() != spec.n_sites) {
    out.emplace_back("site_energies must have n_sites entries");
  } else {
    for (std::size_t i = 0; i < spec.n_sites; ++i) {
      if (!(spec.site_energies[i] > 0.0)) {
        out.push_back("site energy must be > 0 at node " + std::to_string(i + 1));
      }
    }
  }
  if (spec.injection_site >= spec.n_sites) {
    out.emplace_back("injection_site out of range");
  }
  if (spec.sink_site >= spec.n_sites) {
    out.emplace_back("sink_site out of range");
  }
  if (spec.n_sites > 1 && spec.injection_site == spec.sink_site) {
    out.emplace_back("injection_site must differ from sink_site");
  }
  return out;
}

void validate(const NetworkSpec& spec) {
  const auto problems = violations(spec);
  if (!problems.empty()) {
    std::string msg = "invalid network:";
    for (const auto& p : problems) {
      msg += " " + p + ";";
    }
    throw InvalidArgument(msg);
  }
}

NetworkSpec complete_network(std::size_t n, std::size_t injection, std::size_t sink) {
  if (n < 2) {
    throw InvalidArgument("complete_network: need at least 2 sites");
  }
  if (injection >= n || sink >= n) {
    throw InvalidArgument("complete_network: injection or sink index out of range");
  }
  if (injection == sink) {
    throw InvalidArgument("complete_network: injection and sink must differ");
  }
  const auto dim = static_cast<Eigen::Index>(n);
  NetworkSpec spec;
  spec.n_sites = n;
  spec.hopping = RealMatrix::Ones(dim, dim) - RealMatrix::Identity(dim, dim);
  spec.site_energies.assign(n, 1.0);
  spec.injection_site = injection;
  spec.sink_site = sink;
  return spec;
}

NetworkSpec delete_edge(const NetworkSpec& spec, std::size_t a, std::size_t b) {
  return set_hopping(spec, a, b, 0.0);
}

NetworkSpec set_hopping(const NetworkSpec& spec, std::size_t a, std::size_t b, double value) {
  check_pair(spec, a, b, "set_hopping");
  NetworkSpec out = spec;
  const auto i = static_cast<Eigen::Index>(a);
  const auto j = static_cast<Eigen::Index>(b);
  out.hopping(i, j) = out.hopping(j, i) = value;
  return out;
}

double keyed_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return static_cast<double>(keyed_hash(seed, a, b, c) >> 11) * 0x1.0p-53;
}

NetworkSpec apply_disorder(const NetworkSpec& spec, const DisorderConfig& config, std::size_t realization_index) {
  if (config.chi < 0.0) {
    throw InvalidArgument("apply_disorder: chi must be >= 0");
  }
  if (realization_index >= config.realizations) {
    throw InvalidArgument("apply_disorder: realization index " + std::to_string(realization_index) +
                          " out of range for " + std::to_string(config.realizations) + " realizations");
  }
  if (config.chi == 0.0) {
    return spec;
  }
  NetworkSpec out = spec;
  for (auto [a, b] : spec.edges()) {
    const double u = keyed_uniform(config.seed, realization_index, a, b);
    const double delta = config.chi * (2.0 * u - 1.0);
    const auto i = static_cast<Eigen::Index>(a);
    const auto j = static_cast<Eigen::Index>(b);
    out.hopping(i, j) = out.hopping(j, i) = spec.hopping(i, j) * (1.0 + delta);
  }
  return out;
}

bool injection_reaches_sink(const NetworkSpec& spec) {
  return component_of(spec, spec.injection_site)[spec.sink_site] != 0;
}

bool is_connected(const NetworkSpec& spec) {
  const auto label = component_of(spec, 0);
  return std::all_of(label.begin(), label.end(), [](std::size_t l) { return l != 0; });
}

std::vector<NetworkSpec> enumerate_topologies(const TopologyQuery& query) {
  const std::size_t n = query.n_sites;
  if (n < 2 || query.injection >= n || query.sink >= n || query.injection == query.sink) {
    throw InvalidArgument("enumerate_topologies: need n >= 2 and distinct in-range injection/sink");
  }
  const std::size_t max_edges = binomial2(n);
  if (max_edges > 64) {
    throw InvalidArgument("enumerate_topologies: at most 11 sites supported");
  }
  for (std::size_t k : query.edge_counts) {
    if (k > max_edges) {
      throw InvalidArgument("enumerate_topologies: edge count " + std::to_string(k) + " exceeds binomial(" +
                            std::to_string(n) + ", 2) = " + std::to_string(max_edges));
    }
  }
  const bool exhaustive = n <= exhaustive_limit;
  if (!exhaustive && query.per_count == 0) {
    throw InvalidArgument("enumerate_topologies: per_count must be > 0 when sampling (n > " +
                          std::to_string(exhaustive_limit) + ")");
  }

  std::vector<NetworkSpec> out;
  for (std::size_t k : query.edge_counts) {
    std::set<std::uint64_t> classes;
    auto consider = [&](std::uint64_t labeled) {
      NetworkSpec g = decode(labeled, n, query.injection, query.sink);
      if (is_connected(g)) {
        classes.insert(canonical_code(adjacency_of(g), query.injection, query.sink));
      }
    };
    if (exhaustive) {
      for (std::uint64_t code = 0; code < (std::uint64_t{1} << max_edges); ++code) {
        if (static_cast<std::size_t>(std::popcount(code)) == k) {
          consider(code);
        }
      }
    } else {
      // Rejection sampling of k-edge labeled graphs via a keyed partial shuffle.
      const std::size_t attempts = 200 * query.per_count;
      for (std::size_t attempt = 0; attempt < attempts && classes.size() < 4 * query.per_count; ++attempt) {
        std::vector<std::size_t> bits(max_edges);
        std::iota(bits.begin(), bits.end(), 0);
        std::uint64_t code = 0;
        for (std::size_t e = 0; e < k; ++e) {
          const auto span = static_cast<double>(max_edges - e);
          const auto pick = e + static_cast<std::size_t>(keyed_uniform(query.seed, k, attempt, e) * span);
          std::swap(bits[e], bits[pick]);
          code |= std::uint64_t{1} << bits[e];
        }
        consider(code);
      }
    }

    std::vector<std::uint64_t> chosen(classes.begin(), classes.end());
    if (query.per_count > 0 && chosen.size() > query.per_count) {
      std::stable_sort(chosen.begin(), chosen.end(), [&](std::uint64_t x, std::uint64_t y) {
        return keyed_hash(query.seed, k, x, 1) < keyed_hash(query.seed, k, y, 1);
      });
      chosen.resize(query.per_count);
      std::sort(chosen.begin(), chosen.end());
    }
    for (std::uint64_t code : chosen) {
      out.push_back(decode(code, n, query.injection, query.sink));
    }
  }
  return out;
}

std::string describe(const NetworkSpec& spec) {
  const std::size_t n = spec.n_sites;
  bool unit = true;
  for (auto [a, b] : spec.edges()) {
    unit = unit && spec.hopping(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) == 1.0;
  }
  std::vector<std::pair<std::size_t, std::size_t>> missing;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (spec.hopping(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) == 0.0) {
        missing.emplace_back(a, b);
      }
    }
  }
  std::ostringstream out;
  if (unit && missing.size() <= 2) {
    out << "fcn" << n;
    for (auto [a, b] : missing) {
      out << "-del(" << a + 1 << "," << b + 1 << ")";
    }
    return out.str();
  }
  out << "n" << n << "-e" << spec.edge_count() << (unit ? "" : "-weighted") << "-[";
  bool first = true;
  for (auto [a, b] : spec.edges()) {
    out << (first ? "" : ",") << a + 1 << "-" << b + 1;
    first = false;
  }
  out << "]";
  return out.str();
}

nlohmann::json to_json(const NetworkSpec& spec) {
  nlohmann::json edges = nlohmann::json::array();
  for (auto [a, b] : spec.edges()) {
    edges.push_back({a + 1, b + 1, spec.hopping(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))});
  }
  return {
      {"n_sites", spec.n_sites},
      {"edges", edges},
      {"site_energies", spec.site_energies},
      {"injection_site", spec.injection_site + 1},
      {"sink_site", spec.sink_site + 1},
  };
}

NetworkSpec from_json(const nlohmann::json& doc) {
  try {
    NetworkSpec spec;
    spec.n_sites = doc.at("n_sites").get<std::size_t>();
    if (spec.n_sites < 1) {
      throw InvalidArgument("network document: n_sites must be >= 1");
    }
    const auto n = static_cast<Eigen::Index>(spec.n_sites);
    spec.hopping = RealMatrix::Zero(n, n);
    spec.site_energies = doc.contains("site_energies") ? doc.at("site_energies").get<std::vector<double>>()
                                                        : std::vector<double>(spec.n_sites, 1.0);
    const auto injection = doc.at("injection_site").get<std::size_t>();
    const auto sink = doc.at("sink_site").get<std::size_t>();
    if (injection < 1 || sink < 1) {
      throw InvalidArgument("network document: node labels are 1-based");
    }
    spec.injection_site = injection - 1;
    spec.sink_site = sink - 1;
    for (const auto& edge : doc.at("edges")) {
      if (!edge.is_array() || edge.size() < 2 || edge.size() > 3) {
        throw InvalidArgument("network document: each edge must be [a, b] or [a, b, weight]");
      }
      const auto a = edge.at(0).get<std::size_t>();
      const auto b = edge.at(1).get<std::size_t>();
      const double w = edge.size() == 3 ? edge.at(2).get<double>() : 1.0;
      if (a < 1 || b < 1 || a > spec.n_sites || b > spec.n_sites || a == b) {
        throw InvalidArgument("network document: bad edge [" + std::to_string(a) + ", " + std::to_string(b) + "]");
      }
      spec.hopping(static_cast<Eigen::Index>(a - 1), static_cast<Eigen::Index>(b - 1)) = w;
      spec.hopping(static_cast<Eigen::Index>(b - 1), static_cast<Eigen::Index>(a - 1)) = w;
    }
    validate(spec);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("network document: ") + e.what());
  }
}

}  // namespace eet::network
