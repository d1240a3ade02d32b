#include "eet/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/SVD>

#include "eet/errors.hpp"

namespace eet::hamiltonian {
namespace {

void check_site(const SiteHamiltonian& h, std::size_t i, const char* what) {
  if (i >= static_cast<std::size_t>(h.matrix.rows())) {
    std::ostringstream msg;
    msg << what << ": site index " << i + 1 << " out of range 1.." << h.matrix.rows();
    throw InvalidArgument(msg.str());
  }
}

// Block basis rotated so the sink amplitude sits on the first column only.
// Returns the rotated block and whether its first column is bright.
struct RotatedBlock {
  ComplexMatrix basis;
  bool has_bright = false;
};

RotatedBlock rotate_block(const ComplexMatrix& block, std::size_t sink, double dark_tol) {
  const auto row = static_cast<Eigen::Index>(sink);
  const Eigen::RowVectorXcd amplitude = block.row(row);
  const double scale = std::max(1.0, block.cwiseAbs().maxCoeff());
  if (amplitude.norm() < dark_tol * scale) {
    return {block, false};
  }
  if (block.cols() == 1) {
    return {block, true};
  }
  // Right singular vectors of the 1 x b amplitude row: the first is along
  // amplitude^dagger, the rest span its kernel.
  Eigen::JacobiSVD<ComplexMatrix> svd(ComplexMatrix(amplitude), Eigen::ComputeFullV);
  return {block * svd.matrixV(), true};
}

struct DarkBasis {
  ComplexMatrix vectors;  // columns span the dark subspace
  std::vector<std::size_t> blocks;  // blocks contributing dark vectors
};

DarkBasis dark_basis(const SiteHamiltonian& h, std::size_t sink, double dark_tol) {
  const auto blocks = degenerate_blocks(h.spectrum);
  const auto n = h.matrix.rows();
  std::vector<ComplexVector> dark;
  DarkBasis out;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& blk = blocks[b];
    const ComplexMatrix cols = h.spectrum.eigenvectors.middleCols(static_cast<Eigen::Index>(blk.first),
                                                                  static_cast<Eigen::Index>(blk.size));
    const RotatedBlock rot = rotate_block(cols, sink, dark_tol);
    const Eigen::Index start = rot.has_bright ? 1 : 0;
    if (start < rot.basis.cols()) {
      out.blocks.push_back(b);
    }
    for (Eigen::Index c = start; c < rot.basis.cols(); ++c) {
      dark.emplace_back(rot.basis.col(c));
    }
  }
  out.vectors = ComplexMatrix::Zero(n, static_cast<Eigen::Index>(dark.size()));
  for (std::size_t c = 0; c < dark.size(); ++c) {
    out.vectors.col(static_cast<Eigen::Index>(c)) = dark[c];
  }
  return out;
}

}  // namespace

SiteHamiltonian build_hamiltonian(const network::NetworkSpec& spec) {
  network::validate(spec);
  const auto n = static_cast<Eigen::Index>(spec.n_sites);
  ComplexMatrix m = spec.hopping.cast<Complex>();
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = spec.site_energies[static_cast<std::size_t>(i)];
  }
  auto spectrum = numerics::eig_hermitian(m);
  return {std::move(m), std::move(spectrum), spec};
}

std::vector<EigenBlock> degenerate_blocks(const numerics::SpectralDecomposition& spectrum, double rel_tol) {
  const auto& ev = spectrum.eigenvalues;
  std::vector<EigenBlock> blocks;
  if (ev.size() == 0) {
    return blocks;
  }
  const double tol = rel_tol * std::max(1.0, ev.cwiseAbs().maxCoeff());
  blocks.push_back({0, 1, ev(0)});
  for (Eigen::Index k = 1; k < ev.size(); ++k) {
    // Compare to the block's first member so slow drifts cannot chain.
    if (ev(k) - ev(static_cast<Eigen::Index>(blocks.back().first)) <= tol) {
      ++blocks.back().size;
    } else {
      blocks.push_back({static_cast<std::size_t>(k), 1, ev(k)});
    }
  }
  for (auto& blk : blocks) {
    blk.eigenvalue = ev.segment(static_cast<Eigen::Index>(blk.first), static_cast<Eigen::Index>(blk.size)).mean();
  }
  return blocks;
}

std::size_t ExpansionReport::dark_dimension() const {
  return static_cast<std::size_t>(std::count(dark_flags.begin(), dark_flags.end(), true));
}

double ExpansionReport::dark_weight() const {
  double w = 0.0;
  for (std::size_t k = 0; k < coefficients.size(); ++k) {
    if (dark_flags[k]) {
      w += std::norm(coefficients[k]);
    }
  }
  return w;
}

ExpansionReport expand_initial_state(const SiteHamiltonian& h, std::size_t initial, std::size_t sink,
                                     double dark_tol) {
  check_site(h, initial, "expand_initial_state");
  check_site(h, sink, "expand_initial_state");
  if (!(dark_tol > 0.0)) {
    throw InvalidArgument("expand_initial_state: dark_tol must be > 0");
  }
  const auto blocks = degenerate_blocks(h.spectrum);
  const auto n = h.matrix.rows();
  ExpansionReport report;
  report.eigenvalues = h.spectrum.eigenvalues;
  report.eigenvectors = ComplexMatrix(n, n);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& blk = blocks[b];
    const auto first = static_cast<Eigen::Index>(blk.first);
    const auto size = static_cast<Eigen::Index>(blk.size);
    const RotatedBlock rot = rotate_block(h.spectrum.eigenvectors.middleCols(first, size), sink, dark_tol);
    report.eigenvectors.middleCols(first, size) = rot.basis;
    double weight = 0.0;
    for (Eigen::Index c = 0; c < size; ++c) {
      const Complex coeff = std::conj(rot.basis(static_cast<Eigen::Index>(initial), c));
      report.coefficients.push_back(coeff);
      report.block_ids.push_back(b);
      report.dark_flags.push_back(!(rot.has_bright && c == 0));
      weight += std::norm(coeff);
    }
    report.block_weights.push_back(weight);
    report.block_eigenvalues.push_back(blk.eigenvalue);
  }
  return report;
}

ComplexMatrix dark_projector(const SiteHamiltonian& h, std::size_t sink, double dark_tol) {
  check_site(h, sink, "dark_projector");
  if (!(dark_tol > 0.0)) {
    throw InvalidArgument("dark_projector: dark_tol must be > 0");
  }
  const DarkBasis basis = dark_basis(h, sink, dark_tol);
  return basis.vectors * basis.vectors.adjoint();
}

std::size_t dark_dimension(const SiteHamiltonian& h, std::size_t sink, double dark_tol) {
  check_site(h, sink, "dark_dimension");
  return static_cast<std::size_t>(dark_basis(h, sink, dark_tol).vectors.cols());
}

double predicted_efficiency(const SiteHamiltonian& h, std::size_t initial, std::size_t sink, double dark_tol) {
  check_site(h, initial, "predicted_efficiency");
  const ComplexMatrix p = dark_projector(h, sink, dark_tol);
  return 1.0 - p.col(static_cast<Eigen::Index>(initial)).squaredNorm();
}

std::vector<double> predicted_residual_populations(const SiteHamiltonian& h, std::size_t initial, std::size_t sink,
                                                   double dark_tol) {
  check_site(h, initial, "predicted_residual_populations");
  check_site(h, sink, "predicted_residual_populations");
  const DarkBasis basis = dark_basis(h, sink, dark_tol);
  if (basis.blocks.size() > 1) {
    std::ostringstream msg;
    msg << "predicted_residual_populations: dark states span " << basis.blocks.size()
        << " distinct eigenvalues; use time evolution instead";
    throw DarkBlockNotDegenerate(msg.str());
  }
  const ComplexVector projected =
      basis.vectors * (basis.vectors.adjoint() * ComplexVector::Unit(h.matrix.rows(), static_cast<Eigen::Index>(initial)));
  std::vector<double> pops(static_cast<std::size_t>(projected.size()));
  for (Eigen::Index n = 0; n < projected.size(); ++n) {
    pops[static_cast<std::size_t>(n)] = std::norm(projected(n));
  }
  return pops;
}

nlohmann::json to_json(const ExpansionReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t k = 0; k < report.coefficients.size(); ++k) {
    rows.push_back({
        {"eigenvalue", report.eigenvalues(static_cast<Eigen::Index>(k))},
        {"block_id", report.block_ids[k]},
        {"overlap_weight", std::norm(report.coefficients[k])},
        {"dark", static_cast<bool>(report.dark_flags[k])},
    });
  }
  return {{"eigenvectors", rows}, {"block_weights", report.block_weights}, {"dark_weight", report.dark_weight()}};
}

}  // namespace eet::hamiltonian
