#include "eet/observables.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "eet/errors.hpp"

namespace eet::observables {
namespace {

double network_population(const ComplexMatrix& rho, const lindblad::BasisLayout& layout) {
  double total = 0.0;
  for (std::size_t n = 0; n < layout.n_sites(); ++n) {
    const auto i = static_cast<Eigen::Index>(layout.site(n));
    total += rho(i, i).real();
  }
  return total;
}

}  // namespace

double efficiency(const evolve::Trajectory& trajectory) {
  if (trajectory.populations.empty()) {
    throw InvalidArgument("efficiency: empty trajectory");
  }
  return trajectory.populations.back()[trajectory.layout.sink()];
}

double efficiency(const evolve::SteadyState& steady) { return steady.eta; }

SaturationTime saturation_time(const evolve::Trajectory& trajectory, double fraction, std::optional<double> cap) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw InvalidArgument("saturation_time: fraction must lie in (0, 1)");
  }
  const double limit = cap.value_or(trajectory.times.empty() ? 0.0 : trajectory.times.back());
  const std::size_t sink = trajectory.layout.sink();
  for (std::size_t k = 0; k < trajectory.times.size(); ++k) {
    const double p = trajectory.populations[k][sink];
    if (p >= fraction) {
      if (k == 0) {
        return {trajectory.times[0], true};
      }
      const double p0 = trajectory.populations[k - 1][sink];
      const double t0 = trajectory.times[k - 1];
      const double t1 = trajectory.times[k];
      const double t = t0 + (t1 - t0) * (fraction - p0) / (p - p0);
      if (t > limit) {
        break;
      }
      return {t, true};
    }
  }
  return {limit, false};
}

bool trajectory_converged(const evolve::Trajectory& trajectory, double window, double tol) {
  if (trajectory.times.size() < 2) {
    return false;
  }
  const double t_end = trajectory.times.back();
  if (t_end - trajectory.times.front() < window) {
    return false;
  }
  std::size_t k = trajectory.times.size() - 1;
  while (k > 0 && trajectory.times[k] > t_end - window) {
    --k;
  }
  const auto& first = trajectory.populations[k];
  const auto& last = trajectory.populations.back();
  const auto& layout = trajectory.layout;
  bool ok = std::abs(last[layout.sink()] - first[layout.sink()]) < tol;
  if (layout.has_ground()) {
    ok = ok && std::abs(last[layout.ground()] - first[layout.ground()]) < tol;
  }
  return ok;
}

LocalizationReport localization_report(const ComplexMatrix& rho, const lindblad::BasisLayout& layout) {
  const auto d = static_cast<Eigen::Index>(layout.dim());
  if (rho.rows() != d || rho.cols() != d) {
    throw InvalidArgument("localization_report: state dimension does not match layout");
  }
  LocalizationReport report;
  report.magnitudes = rho.cwiseAbs();
  report.network_population = network_population(rho, layout);
  const auto sink = static_cast<Eigen::Index>(layout.sink());
  report.sink_population = rho(sink, sink).real();
  if (layout.has_ground()) {
    const auto g = static_cast<Eigen::Index>(layout.ground());
    report.ground_population = rho(g, g).real();
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (!(i == sink && j == sink) && report.magnitudes(i, j) > localization_threshold) {
        ++report.off_sink_entries;
      }
    }
  }
  report.level_names = layout.level_names();
  return report;
}

RunSummary summarize(const evolve::Trajectory& trajectory, const evolve::IntegratorConfig& cfg, double fraction,
                     std::optional<double> cap) {
  RunSummary s;
  s.eta_inf = efficiency(trajectory);
  s.tau_s = saturation_time(trajectory, fraction, cap);
  const auto& last = trajectory.populations.back();
  const auto& layout = trajectory.layout;
  for (std::size_t n = 0; n < layout.n_sites(); ++n) {
    s.residual_network_population += last[layout.site(n)];
  }
  s.residual_ground_population = layout.has_ground() ? last[layout.ground()] : 0.0;
  s.converged = trajectory_converged(trajectory, cfg.convergence_window, cfg.convergence_tol);
  s.t_end = trajectory.times.back();
  return s;
}

RunSummary summarize(const evolve::SteadyState& steady, const lindblad::BasisLayout& layout) {
  RunSummary s;
  s.eta_inf = steady.eta;
  s.residual_network_population = network_population(steady.state, layout);
  s.residual_ground_population = steady.ground;
  s.converged = steady.converged;
  s.t_end = steady.converged_at;
  return s;
}

nlohmann::json to_json(const RunSummary& summary) {
  nlohmann::json tau = nullptr;
  nlohmann::json reached = nullptr;
  if (summary.tau_s) {
    tau = summary.tau_s->value;
    reached = summary.tau_s->reached;
  }
  return {{"eta_inf", summary.eta_inf},
          {"tau_s", tau},
          {"tau_s_reached", reached},
          {"t_end", summary.t_end},
          {"residual_network_population", summary.residual_network_population},
          {"residual_ground_population", summary.residual_ground_population},
          {"converged", summary.converged},
          {"config_digest", summary.config_digest},
          {"seed", summary.seed}};
}

nlohmann::json to_json(const LocalizationReport& report) {
  std::vector<std::vector<double>> grid;
  for (Eigen::Index i = 0; i < report.magnitudes.rows(); ++i) {
    std::vector<double> row;
    for (Eigen::Index j = 0; j < report.magnitudes.cols(); ++j) {
      row.push_back(report.magnitudes(i, j));
    }
    grid.push_back(std::move(row));
  }
  return {{"levels", report.level_names},
          {"magnitudes", grid},
          {"network_population", report.network_population},
          {"sink_population", report.sink_population},
          {"ground_population", report.ground_population},
          {"off_sink_entries", report.off_sink_entries}};
}

std::string grid_csv(const LocalizationReport& report) {
  std::ostringstream out;
  out << "level";
  for (const auto& n : report.level_names) {
    out << ',' << n;
  }
  out << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < report.magnitudes.rows(); ++i) {
    out << report.level_names[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < report.magnitudes.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", report.magnitudes(i, j));
      out << ',' << buf;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace eet::observables
