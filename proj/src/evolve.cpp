#include "eet/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "eet/errors.hpp"

namespace eet::evolve {
namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;
// Continuous extension (Hairer & Wanner, dopri5 contd5).
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

ComplexMatrix hermitian_part(const ComplexMatrix& m) { return 0.5 * (m + m.adjoint()); }

class DormandPrince {
 public:
  DormandPrince(const lindblad::LindbladModel& model, const ComplexMatrix& rho0, const IntegratorConfig& cfg)
      : model_(model), cfg_(cfg), y_(rho0), t_(0.0) {
    lindblad::apply_rhs_into(model_, y_, k1_);
    h_ = initial_step();
    y_prev_ = y_;
  }

  double time() const { return t_; }
  double previous_time() const { return t_prev_; }
  const ComplexMatrix& state() const { return y_; }

  /// Takes one accepted step without passing t_end.
  void step(double t_end) {
    const double h_min = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t_));
    for (;;) {
      double h = std::min(h_, t_end - t_);
      const bool last = h >= t_end - t_;
      if (h < h_min) {
        std::ostringstream msg;
        msg << "integrate: step size underflow at t = " << t_ << " (h = " << h
            << "); the problem may be stiff, try the exact propagator";
        throw StepSizeUnderflow(msg.str());
      }
      stage_ = y_ + h * a21 * k1_;
      lindblad::apply_rhs_into(model_, stage_, k2_);
      stage_ = y_ + h * (a31 * k1_ + a32 * k2_);
      lindblad::apply_rhs_into(model_, stage_, k3_);
      stage_ = y_ + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
      lindblad::apply_rhs_into(model_, stage_, k4_);
      stage_ = y_ + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
      lindblad::apply_rhs_into(model_, stage_, k5_);
      stage_ = y_ + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
      lindblad::apply_rhs_into(model_, stage_, k6_);
      y_new_ = y_ + h * (a71 * k1_ + a73 * k3_ + a74 * k4_ + a75 * k5_ + a76 * k6_);
      lindblad::apply_rhs_into(model_, y_new_, k7_);
      err_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);

      const double err = error_norm();
      if (err <= 1.0) {
        // PI controller (Hairer's beta = 0.04).
        constexpr double beta = 0.04;
        constexpr double expo = 0.2 - beta * 0.75;
        double fac = std::pow(std::max(err, 1e-10), expo) / std::pow(err_old_, beta) / 0.9;
        fac = std::clamp(fac, 0.1, 5.0);
        err_old_ = std::max(err, 1e-4);
        // Continuous-extension coefficients for the accepted step.
        const ComplexMatrix ydiff = y_new_ - y_;
        const ComplexMatrix bspl = h * k1_ - ydiff;
        r1_ = y_;
        r2_ = ydiff;
        r3_ = bspl;
        r4_ = ydiff - h * k7_ - bspl;
        r5_ = h * (d1 * k1_ + d3 * k3_ + d4 * k4_ + d5 * k5_ + d6 * k6_ + d7 * k7_);

        y_prev_ = y_;
        t_prev_ = t_;
        t_ = last ? t_end : t_ + h;
        h_step_ = h;
        // The Lindblad generator commutes with the adjoint, so symmetrizing
        // k7 keeps FSAL consistent with the symmetrized state.
        y_ = hermitian_part(y_new_);
        k1_ = hermitian_part(k7_);
        h_ = h / fac;
        if (reject_) {
          h_ = std::min(h_, h);
        }
        reject_ = false;
        return;
      }
      const double fac = std::clamp(std::pow(err, 0.2 - 0.04 * 0.75) / 0.9, 1.0, 10.0);
      h_ = h / fac;
      reject_ = true;
    }
  }

  /// Dense output on [previous_time(), time()].
  ComplexMatrix interpolate(double t) const {
    if (t_ == t_prev_) {
      return y_;
    }
    const double theta = (t - t_prev_) / h_step_;
    const double theta1 = 1.0 - theta;
    return hermitian_part(r1_ + theta * (r2_ + theta1 * (r3_ + theta * (r4_ + theta1 * r5_))));
  }

 private:
  double error_norm() const {
    double sum = 0.0;
    const Eigen::Index n = y_.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double scale =
          cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(y_.data()[i]), std::abs(y_new_.data()[i]));
      const double e = std::abs(err_.data()[i]) / scale;
      sum += e * e;
    }
    return std::sqrt(sum / static_cast<double>(n));
  }

  double norm_scaled(const ComplexMatrix& m) const {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double scale = cfg_.abs_tol + cfg_.rel_tol * std::abs(y_.data()[i]);
      const double e = std::abs(m.data()[i]) / scale;
      sum += e * e;
    }
    return std::sqrt(sum / static_cast<double>(m.size()));
  }

  double initial_step() {
    const double d0 = norm_scaled(y_);
    const double d1n = norm_scaled(k1_);
    double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    h0 = std::min(h0, cfg_.t_max);
    const ComplexMatrix y1 = y_ + h0 * k1_;
    ComplexMatrix f1;
    lindblad::apply_rhs_into(model_, y1, f1);
    const double d2 = norm_scaled(f1 - k1_) / h0;
    const double dmax = std::max(d1n, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
    return std::min(100.0 * h0, h1);
  }

  const lindblad::LindbladModel& model_;
  const IntegratorConfig& cfg_;
  ComplexMatrix y_, y_prev_, y_new_, stage_, err_;
  ComplexMatrix k1_, k2_, k3_, k4_, k5_, k6_, k7_;
  ComplexMatrix r1_, r2_, r3_, r4_, r5_;
  double t_ = 0.0;
  double t_prev_ = 0.0;
  double h_ = 0.0;
  double h_step_ = 0.0;
  double err_old_ = 1e-4;
  bool reject_ = false;
};

void require_valid(const IntegratorConfig& cfg) {
  const auto problems = violations(cfg);
  if (!problems.empty()) {
    std::string msg = "invalid integrator config:";
    for (const auto& p : problems) {
      msg += " " + p + ";";
    }
    throw InvalidArgument(msg);
  }
}

void require_matching(const lindblad::LindbladModel& model, const ComplexMatrix& rho0) {
  const auto d = static_cast<Eigen::Index>(model.dim());
  if (rho0.rows() != d || rho0.cols() != d) {
    std::ostringstream msg;
    msg << "initial state is " << rho0.rows() << "x" << rho0.cols() << ", model dimension is " << d;
    throw InvalidArgument(msg.str());
  }
}

}  // namespace

SampleGrid SampleGrid::linear(double step, double start) {
  SampleGrid g;
  g.kind = Kind::Linear;
  g.step = step;
  g.start = start;
  return g;
}

SampleGrid SampleGrid::log(double start, std::size_t count) {
  SampleGrid g;
  g.kind = Kind::Log;
  g.start = start;
  g.count = count;
  return g;
}

SampleGrid SampleGrid::explicit_times(std::vector<double> times) {
  SampleGrid g;
  g.kind = Kind::Explicit;
  g.times = std::move(times);
  return g;
}

std::vector<double> SampleGrid::resolve(double t_max) const {
  std::vector<double> out;
  switch (kind) {
    case Kind::Explicit:
      out = times;
      break;
    case Kind::Linear: {
      if (!(step > 0.0)) {
        throw InvalidArgument("sample grid: linear step must be > 0");
      }
      // Index-based so long grids do not accumulate rounding.
      const auto n = static_cast<std::size_t>(std::floor((t_max - start) / step + 1e-9));
      for (std::size_t k = 0; k <= n; ++k) {
        out.push_back(start + static_cast<double>(k) * step);
      }
      if (out.empty() || out.back() < t_max) {
        out.push_back(t_max);
      }
      break;
    }
    case Kind::Log: {
      if (!(start > 0.0) || count < 2) {
        throw InvalidArgument("sample grid: log grid needs start > 0 and count >= 2");
      }
      out.push_back(0.0);
      const double ratio = std::log(t_max / start) / static_cast<double>(count - 1);
      for (std::size_t k = 0; k < count; ++k) {
        out.push_back(start * std::exp(ratio * static_cast<double>(k)));
      }
      out.back() = t_max;
      break;
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  out.erase(std::remove_if(out.begin(), out.end(), [&](double t) { return t < 0.0 || t > t_max; }), out.end());
  return out;
}

std::vector<std::string> violations(const IntegratorConfig& cfg) {
  std::vector<std::string> out;
  if (!(cfg.rel_tol > 0.0)) out.emplace_back("rel_tol must be > 0");
  if (!(cfg.abs_tol > 0.0)) out.emplace_back("abs_tol must be > 0");
  if (!(cfg.t_max > 0.0)) out.emplace_back("t_max must be > 0");
  if (!(cfg.convergence_window > 0.0)) out.emplace_back("convergence_window must be > 0");
  if (!(cfg.convergence_tol > 0.0)) out.emplace_back("convergence_tol must be > 0");
  if (cfg.samples.kind == SampleGrid::Kind::Linear && !(cfg.samples.step > 0.0)) {
    out.emplace_back("sample step must be > 0");
  }
  if (cfg.samples.kind == SampleGrid::Kind::Log && (!(cfg.samples.start > 0.0) || cfg.samples.count < 2)) {
    out.emplace_back("log sample grid needs start > 0 and count >= 2");
  }
  return out;
}

nlohmann::json to_json(const IntegratorConfig& cfg) {
  nlohmann::json samples;
  switch (cfg.samples.kind) {
    case SampleGrid::Kind::Linear:
      samples = {{"kind", "linear"}, {"start", cfg.samples.start}, {"step", cfg.samples.step}};
      break;
    case SampleGrid::Kind::Log:
      samples = {{"kind", "log"}, {"start", cfg.samples.start}, {"count", cfg.samples.count}};
      break;
    case SampleGrid::Kind::Explicit:
      samples = {{"kind", "explicit"}, {"times", cfg.samples.times}};
      break;
  }
  return {{"rel_tol", cfg.rel_tol},
          {"abs_tol", cfg.abs_tol},
          {"t_max", cfg.t_max},
          {"samples", samples},
          {"convergence_window", cfg.convergence_window},
          {"convergence_tol", cfg.convergence_tol},
          {"state_stride", cfg.state_stride}};
}

IntegratorConfig integrator_from_json(const nlohmann::json& doc) {
  IntegratorConfig cfg;
  cfg.rel_tol = doc.value("rel_tol", cfg.rel_tol);
  cfg.abs_tol = doc.value("abs_tol", cfg.abs_tol);
  cfg.t_max = doc.value("t_max", cfg.t_max);
  cfg.convergence_window = doc.value("convergence_window", cfg.convergence_window);
  cfg.convergence_tol = doc.value("convergence_tol", cfg.convergence_tol);
  cfg.state_stride = doc.value("state_stride", cfg.state_stride);
  if (doc.contains("samples")) {
    const auto& s = doc.at("samples");
    const std::string kind = s.value("kind", "linear");
    if (kind == "linear") {
      cfg.samples = SampleGrid::linear(s.value("step", 0.5), s.value("start", 0.0));
    } else if (kind == "log") {
      cfg.samples = SampleGrid::log(s.value("start", 1e-2), s.value("count", std::size_t{200}));
    } else if (kind == "explicit") {
      cfg.samples = SampleGrid::explicit_times(s.at("times").get<std::vector<double>>());
    } else {
      throw InvalidArgument("integrator config: unknown sample grid kind '" + kind + "'");
    }
  }
  return cfg;
}

std::vector<double> Trajectory::level_series(std::size_t level) const {
  std::vector<double> out;
  out.reserve(populations.size());
  for (const auto& row : populations) {
    out.push_back(row.at(level));
  }
  return out;
}

void check_density_matrix(const ComplexMatrix& rho, double tol) {
  if (rho.rows() != rho.cols() || rho.rows() == 0) {
    throw InvalidArgument("density matrix must be square and non-empty");
  }
  const auto asym = numerics::hermitian_deviation(rho);
  if (asym.max_deviation > tol) {
    throw InvalidArgument("density matrix is not Hermitian (deviation " + std::to_string(asym.max_deviation) + ")");
  }
  const double trace_dev = std::abs(rho.trace() - Complex(1.0, 0.0));
  if (trace_dev > tol) {
    throw InvalidArgument("density matrix trace deviates from 1 by " + std::to_string(trace_dev));
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian_part(rho), Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -tol) {
    throw InvalidArgument("density matrix is not positive semidefinite (min eigenvalue " +
                          std::to_string(solver.eigenvalues().minCoeff()) + ")");
  }
}

Trajectory integrate(const lindblad::LindbladModel& model, const ComplexMatrix& rho0, const IntegratorConfig& cfg) {
  require_valid(cfg);
  require_matching(model, rho0);
  check_density_matrix(rho0);

  Trajectory traj;
  traj.layout = model.layout;
  const std::vector<double> samples = cfg.samples.resolve(cfg.t_max);
  const auto d = static_cast<Eigen::Index>(model.dim());

  auto record = [&](double t, const ComplexMatrix& rho) {
    std::vector<double> pops(static_cast<std::size_t>(d));
    for (Eigen::Index i = 0; i < d; ++i) {
      pops[static_cast<std::size_t>(i)] = rho(i, i).real();
    }
    const double trace_dev = std::abs(rho.trace() - Complex(1.0, 0.0));
    double min_eig = std::numeric_limits<double>::quiet_NaN();
    if (!cfg.skip_min_eig) {
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(rho, Eigen::EigenvaluesOnly);
      min_eig = solver.eigenvalues().minCoeff();
    }
    if (trace_dev > cfg.trace_tol) {
      std::ostringstream msg;
      msg << "integrate: trace deviation " << trace_dev << " at t = " << t << " exceeds " << cfg.trace_tol;
      throw InvariantViolation(msg.str());
    }
    if (min_eig < -cfg.positivity_tol) {
      std::ostringstream msg;
      msg << "integrate: density matrix lost positivity (min eigenvalue " << min_eig << " at t = " << t
          << "); tighten the tolerances";
      throw InvariantViolation(msg.str());
    }
    const std::size_t index = traj.times.size();
    traj.times.push_back(t);
    traj.populations.push_back(std::move(pops));
    traj.trace_dev.push_back(trace_dev);
    traj.min_eig.push_back(min_eig);
    traj.purity.push_back(rho.squaredNorm());
    if (cfg.state_stride > 0 && index % cfg.state_stride == 0) {
      traj.state_indices.push_back(index);
      traj.states.push_back(rho);
    }
  };

  DormandPrince stepper(model, rho0, cfg);
  std::size_t next = 0;
  while (next < samples.size() && samples[next] <= 0.0) {
    record(samples[next], stepper.state());
    ++next;
  }
  while (stepper.time() < cfg.t_max) {
    stepper.step(cfg.t_max);
    while (next < samples.size() && samples[next] <= stepper.time()) {
      const double t = samples[next];
      record(t, t == stepper.time() ? stepper.state() : stepper.interpolate(t));
      ++next;
    }
  }
  traj.final_state = stepper.state();
  return traj;
}

ComplexMatrix propagate_exact(const lindblad::LindbladModel& model, const ComplexMatrix& rho0, double t,
                              std::size_t dim_cap) {
  require_matching(model, rho0);
  if (model.dim() > dim_cap) {
    throw InvalidArgument("propagate_exact: model dimension " + std::to_string(model.dim()) + " exceeds cap " +
                          std::to_string(dim_cap));
  }
  if (t == 0.0) {
    return rho0;
  }
  const ComplexMatrix s = lindblad::build_liouvillian(model);
  const ComplexVector v = numerics::vectorize(rho0);
  const ComplexMatrix out = numerics::expm_action(s, v, t);
  return numerics::devectorize(out.col(0), model.dim());
}

SteadyState find_steady_state(const lindblad::LindbladModel& model, const ComplexMatrix& rho0,
                              const IntegratorConfig& cfg) {
  require_valid(cfg);
  require_matching(model, rho0);
  check_density_matrix(rho0);

  const auto& layout = model.layout;
  const auto sink = static_cast<Eigen::Index>(layout.sink());
  const auto ground = static_cast<Eigen::Index>(layout.has_ground() ? layout.ground() : layout.sink());

  DormandPrince stepper(model, rho0, cfg);
  double checkpoint = 0.0;
  double prev_sink = rho0(sink, sink).real();
  double prev_ground = rho0(ground, ground).real();
  SteadyState out;
  while (stepper.time() < cfg.t_max) {
    stepper.step(cfg.t_max);
    while (checkpoint + cfg.convergence_window <= stepper.time() + 1e-12) {
      checkpoint = std::min(checkpoint + cfg.convergence_window, cfg.t_max);
      const ComplexMatrix rho = checkpoint >= stepper.time() ? stepper.state() : stepper.interpolate(checkpoint);
      const double s = rho(sink, sink).real();
      const double g = rho(ground, ground).real();
      const double trace_dev = std::abs(rho.trace() - Complex(1.0, 0.0));
      if (trace_dev > cfg.trace_tol) {
        std::ostringstream msg;
        msg << "find_steady_state: trace deviation " << trace_dev << " at t = " << checkpoint;
        throw InvariantViolation(msg.str());
      }
      if (std::abs(s - prev_sink) < cfg.convergence_tol && std::abs(g - prev_ground) < cfg.convergence_tol) {
        out.state = rho;
        out.eta = s;
        out.ground = layout.has_ground() ? g : 0.0;
        out.converged_at = checkpoint;
        out.converged = true;
        return out;
      }
      prev_sink = s;
      prev_ground = g;
    }
  }
  out.state = stepper.state();
  out.eta = out.state(sink, sink).real();
  out.ground = layout.has_ground() ? out.state(ground, ground).real() : 0.0;
  out.converged_at = stepper.time();
  out.converged = false;
  return out;
}

std::string to_csv(const Trajectory& trajectory) {
  std::ostringstream out;
  const auto names = trajectory.layout.level_names();
  out << "time";
  for (const auto& n : names) {
    out << ",pop_" << n;
  }
  out << ",trace_dev,min_eig,purity\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  for (std::size_t k = 0; k < trajectory.times.size(); ++k) {
    put(trajectory.times[k]);
    for (double p : trajectory.populations[k]) {
      out << ',';
      put(p);
    }
    out << ',';
    put(trajectory.trace_dev[k]);
    out << ',';
    put(trajectory.min_eig[k]);
    out << ',';
    put(trajectory.purity[k]);
    out << '\n';
  }
  return out.str();
}

}  // namespace eet::evolve
