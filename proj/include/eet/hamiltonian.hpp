#pragma once

#include <cstddef>
#include <vector>

#include "json.hpp"

#include "eet/network.hpp"
#include "eet/numerics.hpp"

namespace eet::hamiltonian {

/// Tight-binding Hamiltonian over the site basis: diagonal omega_n,
/// off-diagonal J_nm, with its spectrum.
struct SiteHamiltonian {
  ComplexMatrix matrix;
  numerics::SpectralDecomposition spectrum;
  network::NetworkSpec source;
};

inline constexpr double default_dark_tol = 1e-9;

SiteHamiltonian build_hamiltonian(const network::NetworkSpec& spec);

/// Contiguous run of (numerically) equal eigenvalues.
struct EigenBlock {
  std::size_t first = 0;
  std::size_t size = 0;
  double eigenvalue = 0.0;
};

/// Groups the ascending spectrum into degenerate blocks.
std::vector<EigenBlock> degenerate_blocks(const numerics::SpectralDecomposition& spectrum, double rel_tol = 1e-8);

/// Expansion of a site state in the Hamiltonian eigenbasis.
///
/// Inside each degenerate block the basis is rotated so that at most one
/// vector carries the block's whole sink-site amplitude and the remainder
/// vanish at the sink. Dark flags and per-block weights are therefore gauge
/// independent; individual signed coefficients are not.
struct ExpansionReport {
  RealVector eigenvalues;
  ComplexMatrix eigenvectors;
  std::vector<Complex> coefficients;   // c_k = <psi_k|initial>
  std::vector<std::size_t> block_ids;  // per eigenvector
  std::vector<bool> dark_flags;        // per eigenvector
  std::vector<double> block_weights;   // per block: sum |c_k|^2
  std::vector<double> block_eigenvalues;

  std::size_t dark_dimension() const;
  /// Sum of |c_k|^2 over dark eigenvectors.
  double dark_weight() const;
};

ExpansionReport expand_initial_state(const SiteHamiltonian& h, std::size_t initial, std::size_t sink,
                                     double dark_tol = default_dark_tol);

/// Orthogonal projector onto the eigenvectors (recombined inside degenerate
/// blocks) with no amplitude on the sink-coupled site.
ComplexMatrix dark_projector(const SiteHamiltonian& h, std::size_t sink, double dark_tol = default_dark_tol);

std::size_t dark_dimension(const SiteHamiltonian& h, std::size_t sink, double dark_tol = default_dark_tol);

/// Noiseless efficiency predictor 1 - ||P_dark |initial>||^2.
double predicted_efficiency(const SiteHamiltonian& h, std::size_t initial, std::size_t sink,
                            double dark_tol = default_dark_tol);

/// |(P_dark |initial>)_n|^2 per site: the stationary network populations when
/// every dark state shares one eigenvalue. Throws DarkBlockNotDegenerate when
/// dark states live in more than one eigenvalue block.
std::vector<double> predicted_residual_populations(const SiteHamiltonian& h, std::size_t initial, std::size_t sink,
                                                   double dark_tol = default_dark_tol);

/// One record per eigenvector: eigenvalue, block id, overlap weight, dark flag.
nlohmann::json to_json(const ExpansionReport& report);

}  // namespace eet::hamiltonian
