#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "eet/numerics.hpp"

namespace eet::network {

/// Network of N two-state sites with symmetric real hopping J_nm.
///
/// Indices are 0-based in memory. Files and the command line use 1-based
/// node labels; conversion happens only in the (de)serializers.
struct NetworkSpec {
  std::size_t n_sites = 0;
  RealMatrix hopping;               // symmetric, zero diagonal
  std::vector<double> site_energies;  // omega_n, all > 0
  std::size_t injection_site = 0;
  std::size_t sink_site = 0;

  std::size_t edge_count() const;
  /// Unordered pairs (a < b) with nonzero hopping.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

/// Every violated invariant, human readable. Empty means valid.
std::vector<std::string> violations(const NetworkSpec& spec);
/// Throws InvalidArgument listing all violations.
void validate(const NetworkSpec& spec);

struct DisorderConfig {
  double chi = 0.0;
  std::uint64_t seed = 0;
  std::size_t realizations = 1;
};

NetworkSpec complete_network(std::size_t n, std::size_t injection, std::size_t sink);
NetworkSpec delete_edge(const NetworkSpec& spec, std::size_t a, std::size_t b);
NetworkSpec set_hopping(const NetworkSpec& spec, std::size_t a, std::size_t b, double value);

/// Multiplies every existing coupling J_nm by (1 + delta), one delta per
/// unordered pair drawn uniformly from [-chi, chi]. The draw is a pure
/// function of (seed, realization_index, n, m).
NetworkSpec apply_disorder(const NetworkSpec& spec, const DisorderConfig& config, std::size_t realization_index);

/// Uniform [0, 1) deviate keyed by four integers. Stateless and portable.
double keyed_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c);

/// True if injection and sink lie in the same connected component.
bool injection_reaches_sink(const NetworkSpec& spec);
bool is_connected(const NetworkSpec& spec);

struct TopologyQuery {
  std::size_t n_sites = 6;
  std::size_t injection = 0;
  std::size_t sink = 5;
  std::vector<std::size_t> edge_counts;
  /// Maximum graphs kept per edge count; 0 keeps all of them.
  std::size_t per_count = 0;
  std::uint64_t seed = 0;
};

/// Connected unit-weight graphs at each requested edge count, one
/// representative per isomorphism class that fixes the injection and sink
/// labels. Exhaustive up to exhaustive_limit sites, seeded rejection sampling
/// above it. When a class list exceeds per_count, a seed-keyed subset is kept.
/// Output order: by edge count as requested, then by canonical code.
std::vector<NetworkSpec> enumerate_topologies(const TopologyQuery& query);

inline constexpr std::size_t exhaustive_limit = 6;

/// Short label such as "fcn6", "fcn6-del(1,6)" or "n6-e9-[1-2,1-3,...]".
std::string describe(const NetworkSpec& spec);

nlohmann::json to_json(const NetworkSpec& spec);
NetworkSpec from_json(const nlohmann::json& doc);

}  // namespace eet::network
