#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "eet/evolve.hpp"
#include "eet/lindblad.hpp"

namespace eet::observables {

/// Result of a threshold search. When the threshold is never reached the
/// value is the cap, so sweep plots stay dense.
struct SaturationTime {
  double value = 0.0;
  bool reached = false;
};

struct RunSummary {
  double eta_inf = 0.0;
  /// Absent for summaries built from a steady-state search.
  std::optional<SaturationTime> tau_s;
  /// Last simulated time.
  double t_end = 0.0;
  double residual_network_population = 0.0;
  double residual_ground_population = 0.0;
  bool converged = false;
  std::string config_digest;
  std::uint64_t seed = 0;
};

/// Final sink population of the trajectory.
double efficiency(const evolve::Trajectory& trajectory);
double efficiency(const evolve::SteadyState& steady);

/// First time the sink population reaches `fraction`, linearly interpolated
/// between samples. Not reached reports `cap`.
SaturationTime saturation_time(const evolve::Trajectory& trajectory, double fraction = 0.99,
                               std::optional<double> cap = std::nullopt);

/// True when the sink (and ground) populations moved less than tol over the
/// last `window` time units of the trajectory.
bool trajectory_converged(const evolve::Trajectory& trajectory, double window, double tol);

struct LocalizationReport {
  RealMatrix magnitudes;  // |rho_ij| over the full basis
  double network_population = 0.0;
  double sink_population = 0.0;
  double ground_population = 0.0;
  /// Entries with |rho_ij| > threshold, excluding the sink diagonal.
  std::size_t off_sink_entries = 0;
  std::vector<std::string> level_names;
};

inline constexpr double localization_threshold = 1e-3;

LocalizationReport localization_report(const ComplexMatrix& rho, const lindblad::BasisLayout& layout);

/// Summary of a trajectory: eta from the last sample, residuals from the final state.
RunSummary summarize(const evolve::Trajectory& trajectory, const evolve::IntegratorConfig& cfg, double fraction,
                     std::optional<double> cap = std::nullopt);
RunSummary summarize(const evolve::SteadyState& steady, const lindblad::BasisLayout& layout);

nlohmann::json to_json(const RunSummary& summary);
nlohmann::json to_json(const LocalizationReport& report);
/// Magnitude grid as a CSV matrix with a header row of level names.
std::string grid_csv(const LocalizationReport& report);

}  // namespace eet::observables
