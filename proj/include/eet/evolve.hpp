#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"

#include "eet/lindblad.hpp"
#include "eet/numerics.hpp"

namespace eet::evolve {

/// Where trajectories are sampled. Explicit times win when non-empty,
/// otherwise a linear or logarithmic grid over [start, t_max] is generated.
struct SampleGrid {
  enum class Kind { Linear, Log, Explicit };
  Kind kind = Kind::Linear;
  double start = 0.0;
  /// Linear: spacing. Ignored for Log.
  double step = 0.5;
  /// Log: number of points. Ignored for Linear.
  std::size_t count = 200;
  std::vector<double> times;

  static SampleGrid linear(double step, double start = 0.0);
  static SampleGrid log(double start, std::size_t count);
  static SampleGrid explicit_times(std::vector<double> times);

  /// Ascending, de-duplicated times clipped to [0, t_max].
  std::vector<double> resolve(double t_max) const;
};

struct IntegratorConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double t_max = 300.0;
  SampleGrid samples;
  double convergence_window = 10.0;
  double convergence_tol = 1e-7;
  /// Keep every k-th sampled state; 0 keeps none (the final state is always kept).
  std::size_t state_stride = 0;
  /// Largest tolerated |tr(rho) - 1| before the run aborts.
  double trace_tol = 1e-6;
  /// Most negative tolerated eigenvalue before the run aborts.
  double positivity_tol = 1e-8;
  /// Skip the per-sample eigenvalue diagnostic (min_eig is then NaN).
  bool skip_min_eig = false;
};

std::vector<std::string> violations(const IntegratorConfig& cfg);
nlohmann::json to_json(const IntegratorConfig& cfg);
IntegratorConfig integrator_from_json(const nlohmann::json& doc);

struct Trajectory {
  lindblad::BasisLayout layout;
  std::vector<double> times;
  /// populations[sample][level] in basis order.
  std::vector<std::vector<double>> populations;
  std::vector<double> trace_dev;
  std::vector<double> min_eig;
  std::vector<double> purity;
  std::vector<std::size_t> state_indices;
  std::vector<ComplexMatrix> states;
  ComplexMatrix final_state;

  std::vector<double> level_series(std::size_t level) const;
  std::vector<double> sink_series() const { return level_series(layout.sink()); }
  std::vector<double> site_series(std::size_t site) const { return level_series(layout.site(site)); }
};

/// Throws unless rho is a density matrix to within tol.
void check_density_matrix(const ComplexMatrix& rho, double tol = 1e-10);

/// Adaptive Dormand-Prince 5(4) integration of the master equation with
/// dense output at the sample times.
Trajectory integrate(const lindblad::LindbladModel& model, const ComplexMatrix& rho0, const IntegratorConfig& cfg);

inline constexpr std::size_t default_exact_dim_cap = 12;

/// devectorize(exp(t S) vec(rho0)) with the full superoperator.
ComplexMatrix propagate_exact(const lindblad::LindbladModel& model, const ComplexMatrix& rho0, double t,
                              std::size_t dim_cap = default_exact_dim_cap);

struct SteadyState {
  ComplexMatrix state;
  double eta = 0.0;
  double ground = 0.0;
  /// Time at which convergence was declared, or the final time reached.
  double converged_at = 0.0;
  bool converged = false;
};

/// Integrates until the sink (and ground, when present) population moves
/// less than convergence_tol across one convergence_window, or t_max.
SteadyState find_steady_state(const lindblad::LindbladModel& model, const ComplexMatrix& rho0,
                              const IntegratorConfig& cfg);

/// CSV with columns time, [pop_ground], pop_site_1..N, pop_sink, trace_dev, min_eig, purity.
std::string to_csv(const Trajectory& trajectory);

}  // namespace eet::evolve
