#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"

#include "eet/network.hpp"
#include "eet/numerics.hpp"

namespace eet::lindblad {

/// Rates exactly as they appear in the dissipators rate * [2 A rho A^dag - {A^dag A, rho}].
struct NoiseConfig {
  double gamma_sink = 0.5;
  double gamma_deph = 0.0;
  /// Per-site dissipation to the ground level. Empty means all zero.
  std::vector<double> gamma_diss;

  bool has_dissipation() const;
};

std::vector<std::string> violations(const NoiseConfig& noise, std::size_t n_sites);

nlohmann::json to_json(const NoiseConfig& noise);
NoiseConfig noise_from_json(const nlohmann::json& doc);

/// Single-excitation basis: [ground] site_1 .. site_N sink.
class BasisLayout {
 public:
  BasisLayout() = default;
  BasisLayout(std::size_t n_sites, bool has_ground) : n_sites_(n_sites), has_ground_(has_ground) {}

  std::size_t dim() const { return n_sites_ + 1 + (has_ground_ ? 1 : 0); }
  std::size_t n_sites() const { return n_sites_; }
  bool has_ground() const { return has_ground_; }
  /// Only valid when has_ground().
  std::size_t ground() const { return 0; }
  std::size_t site(std::size_t n) const { return n + (has_ground_ ? 1 : 0); }
  std::size_t sink() const { return dim() - 1; }

  /// "ground", "site_1".., "sink" in basis order.
  std::vector<std::string> level_names() const;

 private:
  std::size_t n_sites_ = 0;
  bool has_ground_ = false;
};

enum class CollapseKind { Sink, Dephasing, Dissipation };

/// Jump operator |target><source| with its rate.
struct Collapse {
  CollapseKind kind;
  std::size_t target;
  std::size_t source;
  double rate;
  ComplexMatrix op;
};

struct LindbladModel {
  BasisLayout layout;
  ComplexMatrix hamiltonian_full;
  std::vector<Collapse> collapses;
  /// Diagonal of sum_k rate_k A_k^dag A_k, cached for the right-hand side.
  RealVector decay;

  std::size_t dim() const { return layout.dim(); }
};

LindbladModel build_model(const network::NetworkSpec& spec, const NoiseConfig& noise);

/// Superoperator S with vec(drho/dt) = S vec(rho) (column stacking).
ComplexMatrix build_liouvillian(const LindbladModel& model);

/// Matrix-free drho/dt.
ComplexMatrix apply_rhs(const LindbladModel& model, const ComplexMatrix& rho);

/// Same as apply_rhs but writes into out (resized if needed).
void apply_rhs_into(const LindbladModel& model, const ComplexMatrix& rho, ComplexMatrix& out);

/// |i><i| on the site with 0-based index `site`.
ComplexMatrix site_state(const LindbladModel& model, std::size_t site);

}  // namespace eet::lindblad
