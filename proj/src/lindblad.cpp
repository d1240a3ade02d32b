#include "eet/lindblad.hpp"

#include <algorithm>
#include <sstream>

#include "eet/errors.hpp"

namespace eet::lindblad {
namespace {

ComplexMatrix unit_operator(std::size_t dim, std::size_t target, std::size_t source) {
  const auto d = static_cast<Eigen::Index>(dim);
  ComplexMatrix op = ComplexMatrix::Zero(d, d);
  op(static_cast<Eigen::Index>(target), static_cast<Eigen::Index>(source)) = 1.0;
  return op;
}

}  // namespace

bool NoiseConfig::has_dissipation() const {
  return std::any_of(gamma_diss.begin(), gamma_diss.end(), [](double g) { return g > 0.0; });
}

std::vector<std::string> violations(const NoiseConfig& noise, std::size_t n_sites) {
  std::vector<std::string> out;
  if (!(noise.gamma_sink >= 0.0)) {
    out.emplace_back("gamma_sink must be >= 0");
  }
  if (!(noise.gamma_deph >= 0.0)) {
    out.emplace_back("gamma_deph must be >= 0");
  }
  if (!noise.gamma_diss.empty() && noise.gamma_diss.size() != n_sites) {
    out.push_back("gamma_diss must be empty or have " + std::to_string(n_sites) + " entries");
  }
  for (std::size_t n = 0; n < noise.gamma_diss.size(); ++n) {
    if (!(noise.gamma_diss[n] >= 0.0)) {
      out.push_back("gamma_diss must be >= 0 at node " + std::to_string(n + 1));
    }
  }
  return out;
}

nlohmann::json to_json(const NoiseConfig& noise) {
  return {{"gamma_sink", noise.gamma_sink}, {"gamma_deph", noise.gamma_deph}, {"gamma_diss", noise.gamma_diss}};
}

NoiseConfig noise_from_json(const nlohmann::json& doc) {
  NoiseConfig noise;
  noise.gamma_sink = doc.value("gamma_sink", noise.gamma_sink);
  noise.gamma_deph = doc.value("gamma_deph", noise.gamma_deph);
  noise.gamma_diss = doc.value("gamma_diss", noise.gamma_diss);
  return noise;
}

std::vector<std::string> BasisLayout::level_names() const {
  std::vector<std::string> names;
  if (has_ground_) {
    names.emplace_back("ground");
  }
  for (std::size_t n = 0; n < n_sites_; ++n) {
    names.push_back("site_" + std::to_string(n + 1));
  }
  names.emplace_back("sink");
  return names;
}

LindbladModel build_model(const network::NetworkSpec& spec, const NoiseConfig& noise) {
  network::validate(spec);
  const auto problems = violations(noise, spec.n_sites);
  if (!problems.empty()) {
    std::string msg = "invalid noise config:";
    for (const auto& p : problems) {
      msg += " " + p + ";";
    }
    throw InvalidArgument(msg);
  }

  LindbladModel model;
  model.layout = BasisLayout(spec.n_sites, noise.has_dissipation());
  const auto& layout = model.layout;
  const std::size_t dim = layout.dim();
  const auto d = static_cast<Eigen::Index>(dim);

  model.hamiltonian_full = ComplexMatrix::Zero(d, d);
  for (std::size_t n = 0; n < spec.n_sites; ++n) {
    const auto i = static_cast<Eigen::Index>(layout.site(n));
    model.hamiltonian_full(i, i) = spec.site_energies[n];
    for (std::size_t m = 0; m < spec.n_sites; ++m) {
      if (m != n) {
        model.hamiltonian_full(i, static_cast<Eigen::Index>(layout.site(m))) =
            spec.hopping(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
      }
    }
  }

  auto add = [&](CollapseKind kind, std::size_t target, std::size_t source, double rate) {
    model.collapses.push_back({kind, target, source, rate, unit_operator(dim, target, source)});
  };
  add(CollapseKind::Sink, layout.sink(), layout.site(spec.sink_site), noise.gamma_sink);
  if (noise.gamma_deph > 0.0) {
    for (std::size_t n = 0; n < spec.n_sites; ++n) {
      add(CollapseKind::Dephasing, layout.site(n), layout.site(n), noise.gamma_deph);
    }
  }
  for (std::size_t n = 0; n < noise.gamma_diss.size(); ++n) {
    if (noise.gamma_diss[n] > 0.0) {
      add(CollapseKind::Dissipation, layout.ground(), layout.site(n), noise.gamma_diss[n]);
    }
  }

  model.decay = RealVector::Zero(d);
  for (const auto& c : model.collapses) {
    model.decay(static_cast<Eigen::Index>(c.source)) += c.rate;
  }
  return model;
}

ComplexMatrix build_liouvillian(const LindbladModel& model) {
  const auto d = static_cast<Eigen::Index>(model.dim());
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  const ComplexMatrix& h = model.hamiltonian_full;
  const Complex minus_i(0.0, -1.0);
  ComplexMatrix s = minus_i * (numerics::kron(id, h) - numerics::kron(h.transpose(), id));
  for (const auto& c : model.collapses) {
    const ComplexMatrix ada = c.op.adjoint() * c.op;
    s += c.rate * (2.0 * numerics::kron(c.op.conjugate(), c.op) - numerics::kron(id, ada) -
                   numerics::kron(ada.transpose(), id));
  }
  return s;
}

void apply_rhs_into(const LindbladModel& model, const ComplexMatrix& rho, ComplexMatrix& out) {
  const auto d = static_cast<Eigen::Index>(model.dim());
  if (rho.rows() != d || rho.cols() != d) {
    std::ostringstream msg;
    msg << "apply_rhs: density matrix is " << rho.rows() << "x" << rho.cols() << ", model dimension is " << d;
    throw InvalidArgument(msg.str());
  }
  const ComplexMatrix& h = model.hamiltonian_full;
  const Complex minus_i(0.0, -1.0);
  // -i[H, rho] - {D, rho} with D = sum_k rate_k A_k^dag A_k diagonal.
  out.noalias() = minus_i * (h * rho);
  out.noalias() -= minus_i * (rho * h);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      out(i, j) -= (model.decay(i) + model.decay(j)) * rho(i, j);
    }
  }
  // Single-entry jumps: A rho A^dag = rho(source, source) |target><target|.
  for (const auto& c : model.collapses) {
    const auto t = static_cast<Eigen::Index>(c.target);
    const auto s = static_cast<Eigen::Index>(c.source);
    out(t, t) += 2.0 * c.rate * rho(s, s);
  }
}

ComplexMatrix apply_rhs(const LindbladModel& model, const ComplexMatrix& rho) {
  ComplexMatrix out;
  apply_rhs_into(model, rho, out);
  return out;
}

ComplexMatrix site_state(const LindbladModel& model, std::size_t site) {
  if (site >= model.layout.n_sites()) {
    throw InvalidArgument("site_state: site index " + std::to_string(site + 1) + " out of range");
  }
  const auto d = static_cast<Eigen::Index>(model.dim());
  ComplexMatrix rho = ComplexMatrix::Zero(d, d);
  const auto i = static_cast<Eigen::Index>(model.layout.site(site));
  rho(i, i) = 1.0;
  return rho;
}

}  // namespace eet::lindblad
