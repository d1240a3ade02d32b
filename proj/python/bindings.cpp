#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "eet/cli.hpp"
#include "eet/config.hpp"
#include "eet/errors.hpp"
#include "eet/evolve.hpp"
#include "eet/experiments.hpp"
#include "eet/hamiltonian.hpp"
#include "eet/lindblad.hpp"
#include "eet/network.hpp"
#include "eet/observables.hpp"

namespace py = pybind11;
using namespace eet;

namespace {

// Python callers use 1-based node labels, like the CLI and the file formats.
std::size_t node(std::size_t label) {
  if (label < 1) throw InvalidArgument("node labels are 1-based");
  return label - 1;
}

py::dict summary_dict(const observables::RunSummary& s) {
  return py::module_::import("json").attr("loads")(observables::to_json(s).dump());
}

py::object json_to_py(const nlohmann::json& doc) { return py::module_::import("json").attr("loads")(doc.dump()); }

experiments::RunContext context(const lindblad::NoiseConfig& noise, const evolve::IntegratorConfig& integrator,
                                double fraction, std::size_t workers) {
  experiments::RunContext ctx;
  ctx.noise = noise;
  ctx.integrator = integrator;
  ctx.fraction = fraction;
  ctx.workers = workers;
  return ctx;
}

py::dict sweep_dict(const experiments::SweepResult& r) {
  py::dict out;
  out["experiment"] = r.experiment;
  out["axis"] = r.axis_name;
  out["summary_csv"] = experiments::summary_csv(r);
  out["aggregate_csv"] = experiments::aggregate_csv(r);
  py::list rows;
  for (const auto& row : r.rows) {
    py::dict d = summary_dict(row.summary);
    d["label"] = row.label;
    d["value"] = row.value;
    d["realization"] = row.realization;
    for (std::size_t k = 0; k < r.metric_names.size(); ++k) d[py::str(r.metric_names[k])] = row.metrics[k];
    rows.append(d);
  }
  out["rows"] = rows;
  py::list aggs;
  for (const auto& a : r.aggregates) {
    py::dict d;
    d["label"] = a.label;
    d["value"] = a.value;
    d["count"] = a.count;
    d["mean_eta"] = a.mean_eta;
    d["stddev_eta"] = a.stddev_eta;
    d["sem_eta"] = a.sem_eta;
    aggs.append(d);
  }
  out["aggregates"] = aggs;
  out["config_digest"] = r.config_digest;
  return out;
}

}  // namespace

PYBIND11_MODULE(_eet, m) {
  m.doc() = "Excitation energy transport on networks (compiled core)";

  auto base_error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base_error.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base_error.ptr());

  py::class_<network::NetworkSpec>(m, "Network")
      .def_readonly("n_sites", &network::NetworkSpec::n_sites)
      .def_readonly("hopping", &network::NetworkSpec::hopping)
      .def_readonly("site_energies", &network::NetworkSpec::site_energies)
      .def_property_readonly("injection", [](const network::NetworkSpec& s) { return s.injection_site + 1; })
      .def_property_readonly("sink", [](const network::NetworkSpec& s) { return s.sink_site + 1; })
      .def("edge_count", &network::NetworkSpec::edge_count)
      .def("edges",
           [](const network::NetworkSpec& s) {
             std::vector<std::pair<std::size_t, std::size_t>> out;
             for (auto [a, b] : s.edges()) out.emplace_back(a + 1, b + 1);
             return out;
           })
      .def("to_json", [](const network::NetworkSpec& s) { return network::to_json(s).dump(); })
      .def("__eq__", [](const network::NetworkSpec& a, const network::NetworkSpec& b) { return a == b; })
      .def("__repr__", [](const network::NetworkSpec& s) { return "<Network " + network::describe(s) + ">"; });

  m.def(
      "complete_network",
      [](std::size_t n, std::size_t injection, std::size_t sink) {
        return network::complete_network(n, node(injection), node(sink == 0 ? n : sink));
      },
      py::arg("n_sites"), py::arg("injection") = 1, py::arg("sink") = 0,
      "Fully connected network; sink defaults to node N.");
  m.def("parse_network", &config::parse_network_shorthand, py::arg("text"), "Parse 'fcn:N[~a,b...]'.");
  m.def("network_from_json", [](const std::string& text) { return network::from_json(nlohmann::json::parse(text)); });
  m.def(
      "delete_edge", [](const network::NetworkSpec& s, std::size_t a, std::size_t b) {
        return network::delete_edge(s, node(a), node(b));
      });
  m.def(
      "set_hopping", [](const network::NetworkSpec& s, std::size_t a, std::size_t b, double w) {
        return network::set_hopping(s, node(a), node(b), w);
      });
  m.def(
      "apply_disorder",
      [](const network::NetworkSpec& s, double chi, std::uint64_t seed, std::size_t realizations, std::size_t r) {
        return network::apply_disorder(s, {chi, seed, realizations}, r);
      },
      py::arg("network"), py::arg("chi"), py::arg("seed"), py::arg("realizations"), py::arg("realization"));

  py::class_<lindblad::NoiseConfig>(m, "Noise")
      .def(py::init([](double gamma_sink, double gamma_deph, std::vector<double> gamma_diss) {
             return lindblad::NoiseConfig{gamma_sink, gamma_deph, std::move(gamma_diss)};
           }),
           py::arg("gamma_sink") = 0.5, py::arg("gamma_deph") = 0.0, py::arg("gamma_diss") = std::vector<double>{})
      .def_readwrite("gamma_sink", &lindblad::NoiseConfig::gamma_sink)
      .def_readwrite("gamma_deph", &lindblad::NoiseConfig::gamma_deph)
      .def_readwrite("gamma_diss", &lindblad::NoiseConfig::gamma_diss);

  py::class_<evolve::IntegratorConfig>(m, "Integrator")
      .def(py::init([](double t_max, double sample_step, double rel_tol, double abs_tol) {
             evolve::IntegratorConfig c;
             c.t_max = t_max;
             c.samples = evolve::SampleGrid::linear(sample_step);
             c.rel_tol = rel_tol;
             c.abs_tol = abs_tol;
             return c;
           }),
           py::arg("t_max") = 300.0, py::arg("sample_step") = 0.5, py::arg("rel_tol") = 1e-8,
           py::arg("abs_tol") = 1e-10)
      .def_readwrite("t_max", &evolve::IntegratorConfig::t_max)
      .def_readwrite("rel_tol", &evolve::IntegratorConfig::rel_tol)
      .def_readwrite("abs_tol", &evolve::IntegratorConfig::abs_tol);

  m.def("hamiltonian", [](const network::NetworkSpec& s) { return hamiltonian::build_hamiltonian(s).matrix; });
  m.def(
      "predicted_efficiency",
      [](const network::NetworkSpec& s) {
        return hamiltonian::predicted_efficiency(hamiltonian::build_hamiltonian(s), s.injection_site, s.sink_site);
      },
      "Noiseless efficiency 1 - ||P_dark|injection>||^2.");
  m.def("dark_dimension", [](const network::NetworkSpec& s) {
    return hamiltonian::dark_dimension(hamiltonian::build_hamiltonian(s), s.sink_site);
  });
  m.def("dark_projector", [](const network::NetworkSpec& s) {
    return hamiltonian::dark_projector(hamiltonian::build_hamiltonian(s), s.sink_site);
  });
  m.def("expansion", [](const network::NetworkSpec& s) {
    const auto h = hamiltonian::build_hamiltonian(s);
    return json_to_py(hamiltonian::to_json(hamiltonian::expand_initial_state(h, s.injection_site, s.sink_site)));
  });
  m.def(
      "liouvillian",
      [](const network::NetworkSpec& s, const lindblad::NoiseConfig& noise) {
        return lindblad::build_liouvillian(lindblad::build_model(s, noise));
      },
      py::arg("network"), py::arg("noise") = lindblad::NoiseConfig{});

  m.def(
      "simulate",
      [](const network::NetworkSpec& s, const lindblad::NoiseConfig& noise, const evolve::IntegratorConfig& cfg,
         double fraction) {
        const auto model = lindblad::build_model(s, noise);
        evolve::Trajectory traj;
        {
          py::gil_scoped_release release;
          traj = evolve::integrate(model, lindblad::site_state(model, s.injection_site), cfg);
        }
        RealMatrix pops(static_cast<Eigen::Index>(traj.times.size()), static_cast<Eigen::Index>(model.dim()));
        for (std::size_t k = 0; k < traj.times.size(); ++k)
          for (std::size_t j = 0; j < model.dim(); ++j)
            pops(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = traj.populations[k][j];
        py::dict out;
        out["times"] = traj.times;
        out["populations"] = pops;
        out["levels"] = traj.layout.level_names();
        out["purity"] = traj.purity;
        out["final_state"] = traj.final_state;
        out["summary"] = summary_dict(observables::summarize(traj, cfg, fraction));
        return out;
      },
      py::arg("network"), py::arg("noise") = lindblad::NoiseConfig{},
      py::arg("integrator") = evolve::IntegratorConfig{}, py::arg("fraction") = 0.99,
      "Integrate from the injection site; populations are [sample, level].");
  m.def(
      "propagate_exact",
      [](const network::NetworkSpec& s, const lindblad::NoiseConfig& noise, double t) {
        const auto model = lindblad::build_model(s, noise);
        return evolve::propagate_exact(model, lindblad::site_state(model, s.injection_site), t);
      },
      py::arg("network"), py::arg("noise"), py::arg("t"));

  m.def(
      "hopping_sweep",
      [](const network::NetworkSpec& s, std::size_t a, std::size_t b, const std::vector<double>& values,
         const lindblad::NoiseConfig& noise, const evolve::IntegratorConfig& cfg, std::size_t workers) {
        experiments::SweepResult r;
        {
          py::gil_scoped_release release;
          r = experiments::hopping_sweep(s, node(a), node(b), values, context(noise, cfg, 0.99, workers));
        }
        return sweep_dict(r);
      },
      py::arg("network"), py::arg("a"), py::arg("b"), py::arg("values"), py::arg("noise") = lindblad::NoiseConfig{},
      py::arg("integrator") = evolve::IntegratorConfig{}, py::arg("workers") = 1);
  m.def(
      "disorder_sweep",
      [](const network::NetworkSpec& s, const std::vector<double>& chis, std::size_t realizations, std::uint64_t seed,
         const lindblad::NoiseConfig& noise, const evolve::IntegratorConfig& cfg, std::size_t workers) {
        experiments::SweepResult r;
        {
          py::gil_scoped_release release;
          r = experiments::disorder_sweep(s, chis, realizations, seed, context(noise, cfg, 0.99, workers));
        }
        return sweep_dict(r);
      },
      py::arg("network"), py::arg("chis"), py::arg("realizations"), py::arg("seed"),
      py::arg("noise") = lindblad::NoiseConfig{}, py::arg("integrator") = evolve::IntegratorConfig{},
      py::arg("workers") = 1);
  m.def(
      "saturation_sweep",
      [](const network::NetworkSpec& s, std::size_t a, std::size_t b, const std::vector<double>& values, double cap,
         double sample_step, double fraction, std::size_t workers) {
        experiments::SaturationResult r;
        {
          py::gil_scoped_release release;
          r = experiments::saturation_sweep(s, node(a), node(b), values, cap, sample_step,
                                            context({}, {}, fraction, workers));
        }
        py::dict out = sweep_dict(r.sweep);
        out["argmin"] = r.argmin;
        out["min_tau"] = r.min_tau;
        return out;
      },
      py::arg("network"), py::arg("a"), py::arg("b"), py::arg("values"), py::arg("cap") = 500.0,
      py::arg("sample_step") = 0.01, py::arg("fraction") = 0.99, py::arg("workers") = 1);

  m.def(
      "run",
      [](const std::string& config_json) {
        cli::Outcome o;
        const auto cfg = config::from_json(nlohmann::json::parse(config_json));
        {
          py::gil_scoped_release release;
          o = cli::run(cfg);
        }
        return py::make_tuple(o.exit_code, o.summary_line);
      },
      py::arg("config_json"), "Run a full experiment config (JSON text) and write its outputs.");
  m.def("default_config", [](const std::string& experiment) {
    return config::to_json(config::defaults_for(config::experiment_from_string(experiment))).dump();
  });
}
