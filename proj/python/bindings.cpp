#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "simcompose/commands.hpp"
#include "simcompose/error.hpp"
#include "simcompose/project.hpp"

namespace py = pybind11;
using namespace simcompose;

namespace {

commands::Options make_options(std::optional<Vector> eta, std::optional<double> epsilon,
                               std::optional<double> t_final, std::optional<double> dt) {
  commands::Options o;
  o.eta = std::move(eta);
  o.epsilon = epsilon;
  o.t_final = t_final;
  o.dt = dt;
  return o;
}

template <typename F>
py::tuple captured(F&& f) {
  std::ostringstream out;
  const int code = f(out);
  return py::make_tuple(code, out.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Reduced-order abstractions of interconnected linear systems";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<project::ProjectFile>(m, "Project")
      .def_readonly("name", &project::ProjectFile::name)
      .def_readwrite("parameters", &project::ProjectFile::parameters)
      .def_property_readonly("size",
                             [](const project::ProjectFile& p) { return p.subsystems.size(); })
      .def("to_json", &project::serialize);

  m.def("parse", &project::parse, py::arg("text"));
  m.def("load", &project::load, py::arg("path"));
  m.def("bundled_example", [] { return project::parse(project::bundled_example()); });

  py::class_<abstraction::AbstractionResult>(m, "Abstraction")
      .def_property_readonly("Ahat", [](const abstraction::AbstractionResult& r) { return r.abstract_system.A; })
      .def_property_readonly("Bhat", [](const abstraction::AbstractionResult& r) { return r.abstract_system.B; })
      .def_property_readonly("Dhat", [](const abstraction::AbstractionResult& r) { return r.abstract_system.D; })
      .def_property_readonly("Chat", [](const abstraction::AbstractionResult& r) { return r.abstract_system.C_ext; })
      .def_property_readonly("P", [](const abstraction::AbstractionResult& r) { return r.simfn.P; })
      .def_property_readonly("M", [](const abstraction::AbstractionResult& r) { return Matrix(r.simfn.M.matrix()); })
      .def_property_readonly("K1", [](const abstraction::AbstractionResult& r) { return r.simfn.K1; })
      .def_property_readonly("K2", [](const abstraction::AbstractionResult& r) { return r.simfn.K2; })
      .def_property_readonly("K3", [](const abstraction::AbstractionResult& r) { return r.simfn.K3; })
      .def_property_readonly("K4", [](const abstraction::AbstractionResult& r) { return r.simfn.K4; })
      .def_property_readonly("lambda_", [](const abstraction::AbstractionResult& r) { return r.gains.lambda; })
      .def_property_readonly("rho", [](const abstraction::AbstractionResult& r) { return r.gains.rho; })
      .def_property_readonly("mu", [](const abstraction::AbstractionResult& r) { return r.gains.mu_coeffs; });

  py::class_<commands::Pipeline>(m, "Pipeline")
      .def_readonly("abstractions", &commands::Pipeline::abstractions)
      .def_property_readonly("Gamma", [](const commands::Pipeline& p) { return p.gm.Gamma; })
      .def_property_readonly("lambdas", [](const commands::Pipeline& p) { return p.gm.lambdas; })
      .def_property_readonly("rhos", [](const commands::Pipeline& p) { return p.gm.rhos; })
      .def_property_readonly("spectral_radius",
                             [](const commands::Pipeline& p) { return p.small_gain.spectral_radius; })
      .def_property_readonly("small_gain_ok", [](const commands::Pipeline& p) { return p.small_gain.ok(); })
      .def_property_readonly("dominant_cycle",
                             [](const commands::Pipeline& p) { return p.small_gain.dominant_cycle; });

  m.def("build_pipeline", &commands::build_pipeline, py::arg("project"));

  py::class_<commands::Composition>(m, "Composition")
      .def_property_readonly("eta", [](const commands::Composition& c) { return c.path.eta; })
      .def_property_readonly("epsilon", [](const commands::Composition& c) { return c.path.epsilon; })
      .def_property_readonly("margin", [](const commands::Composition& c) { return c.path.margin; })
      .def_property_readonly("lambda_", [](const commands::Composition& c) { return c.composed.lambda; })
      .def_property_readonly("rho", [](const commands::Composition& c) { return c.composed.rho; })
      .def_property_readonly("alpha", [](const commands::Composition& c) { return c.composed.alpha; })
      .def_readonly("overridden", &commands::Composition::overridden)
      .def_readonly("certified", &commands::Composition::certified);

  m.def(
      "compose",
      [](const project::ProjectFile& p, std::optional<Vector> eta, std::optional<double> epsilon) {
        const auto pl = commands::build_pipeline(p);
        return commands::choose_composition(pl, p, make_options(std::move(eta), epsilon, {}, {}));
      },
      py::arg("project"), py::arg("eta") = py::none(), py::arg("epsilon") = py::none());

  m.def(
      "simulate",
      [](const project::ProjectFile& p, std::optional<Vector> eta, std::optional<double> epsilon,
         std::optional<double> t_final, std::optional<double> dt) {
        const auto opts = make_options(std::move(eta), epsilon, t_final, dt);
        const auto pl = commands::build_pipeline(p);
        const auto c = commands::choose_composition(pl, p, opts);
        if (!c) throw ValidationError("small-gain condition fails");
        const auto sim = commands::run_simulation(pl, p, c->composed, opts);
        py::dict d;
        d["t"] = sim.run.abstract_run.times;
        d["V"] = sim.run.V;
        d["mismatch"] = sim.run.mismatch;
        d["scalar_bound"] = sim.report.scalar_bound;
        d["min_margin"] = sim.report.min_margin;
        d["min_vector_margin"] = sim.report.min_vector_margin;
        d["vector_bound"] = sim.report.vector_bound;
        d["u_inf"] = sim.report.u_inf;
        return d;
      },
      py::arg("project"), py::arg("eta") = py::none(), py::arg("epsilon") = py::none(),
      py::arg("t_final") = py::none(), py::arg("dt") = py::none());

  m.def("check", [](const project::ProjectFile& p) {
    return captured([&](std::ostream& o) { return commands::cmd_check(p, o); });
  });
  m.def("reproduce_example", [] {
    return captured([](std::ostream& o) { return commands::cmd_reproduce_example(o); });
  });
}
