#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ppc/certify.hpp"
#include "ppc/graph.hpp"
#include "ppc/performance.hpp"
#include "ppc/scenario.hpp"
#include "ppc/sim.hpp"

namespace py = pybind11;
using namespace ppc;

PYBIND11_MODULE(_core, m) {
  m.doc() = "leader-follower consensus simulation and feasibility "
            "certification under prescribed performance funnels";

  py::register_exception<GraphError>(m, "GraphError");
  py::register_exception<OutOfFunnel>(m, "OutOfFunnel");
  py::register_exception<SimError>(m, "SimError");
  py::register_exception<ValidationError>(m, "ValidationError");
  py::register_exception<UnknownPreset>(m, "UnknownPreset");

  py::class_<Topology>(m, "Topology")
      .def_readonly("n", &Topology::n)
      .def_readonly("edges", &Topology::edges)
      .def_readonly("n_followers", &Topology::n_followers)
      .def_property_readonly("m", &Topology::m)
      .def_property_readonly("n_leaders", &Topology::n_leaders)
      .def("leaders", &Topology::leaders);

  py::class_<DerivedMatrices>(m, "DerivedMatrices")
      .def_readonly("D", &DerivedMatrices::D)
      .def_readonly("L", &DerivedMatrices::L)
      .def_readonly("Le", &DerivedMatrices::Le)
      .def_readonly("Df", &DerivedMatrices::Df)
      .def_readonly("Di", &DerivedMatrices::Di)
      .def_readonly("DiTDi", &DerivedMatrices::DiTDi)
      .def_readonly("B", &DerivedMatrices::B);

  m.def("build_topology", &build_topology, py::arg("n"), py::arg("edges"),
        py::arg("leaders"));
  m.def("make_chain", &make_chain, py::arg("n"), py::arg("n_f"));
  m.def("make_star", &make_star, py::arg("n"), py::arg("leaders"));
  m.def("derive_matrices", &derive_matrices);

  py::class_<PerformanceSpec>(m, "PerformanceSpec")
      .def(py::init([](double rho0, double rho_inf, double l, double M) {
             return PerformanceSpec{rho0, rho_inf, l, M};
           }),
           py::arg("rho0") = 5.0, py::arg("rho_inf") = 0.1,
           py::arg("l") = 1.0, py::arg("M") = 1.0)
      .def_readwrite("rho0", &PerformanceSpec::rho0)
      .def_readwrite("rho_inf", &PerformanceSpec::rho_inf)
      .def_readwrite("l", &PerformanceSpec::l)
      .def_readwrite("M", &PerformanceSpec::M);

  m.def("rho", &rho, py::arg("spec"), py::arg("t"));
  m.def("alpha", &alpha, py::arg("spec"), py::arg("t"));
  m.def("select_region", &select_region, py::arg("x0"), py::arg("M"));
  m.def("make_channel", &make_channel, py::arg("spec"), py::arg("x0"),
        py::arg("gain") = 1.0);
  m.def("transform", &transform, py::arg("channel"), py::arg("x_hat"));
  m.def("jacobian", &jacobian, py::arg("channel"), py::arg("x_hat"),
        py::arg("t"));

  py::class_<EdgeChannel>(m, "EdgeChannel")
      .def_readonly("region_lo", &EdgeChannel::region_lo)
      .def_readonly("region_hi", &EdgeChannel::region_hi)
      .def_readonly("g", &EdgeChannel::g);

  py::enum_<GammaBarKind>(m, "GammaBarKind")
      .value("value", GammaBarKind::value)
      .value("unbounded_above", GammaBarKind::unbounded_above)
      .value("infeasible", GammaBarKind::infeasible);

  py::class_<FeasibilityReport>(m, "FeasibilityReport")
      .def_readonly("kind", &FeasibilityReport::kind)
      .def_readonly("gamma_bar", &FeasibilityReport::gamma_bar)
      .def_readonly("l_max", &FeasibilityReport::l_max)
      .def_readonly("approved", &FeasibilityReport::approved)
      .def_readonly("method", &FeasibilityReport::method);

  m.def("gamma_matrix", &gamma_matrix, py::arg("dm"), py::arg("gamma"));
  m.def("min_eig_psd", &min_eig_psd, py::arg("matrix"),
        py::arg("tol") = 1e-9);
  m.def("max_gamma", &max_gamma, py::arg("dm"), py::arg("gamma_cap") = 1e3);
  m.def("check_theorem1", &check_theorem1, py::arg("dm"), py::arg("l_max"));
  m.def("chain_k_factor", &chain_k_factor, py::arg("n_f"),
        py::arg("t_end") = 10.0, py::arg("dt") = 1e-3);
  m.def("star_bound", &star_bound);

  py::class_<ChainAnalysis>(m, "ChainAnalysis")
      .def_readonly("n_f", &ChainAnalysis::n_f)
      .def_readonly("A", &ChainAnalysis::A)
      .def_readonly("lambda_max", &ChainAnalysis::lambda_max)
      .def_readonly("k_factor", &ChainAnalysis::k_factor)
      .def_readonly("admissible_l", &ChainAnalysis::admissible_l);

  py::class_<Scenario>(m, "Scenario")
      .def_readonly("name", &Scenario::name)
      .def_readonly("topology", &Scenario::topology)
      .def_readonly("gains", &Scenario::gains)
      .def_readonly("xbar0", &Scenario::xbar0)
      .def_readonly("inferred_topology", &Scenario::inferred_topology)
      .def("to_json", &scenario_to_json);

  py::class_<RunSummary>(m, "RunSummary")
      .def_readonly("scenario", &RunSummary::scenario)
      .def_readonly("approved", &RunSummary::approved)
      .def_readonly("method", &RunSummary::method)
      .def_readonly("violation_count", &RunSummary::violation_count)
      .def_readonly("converged_at", &RunSummary::converged_at)
      .def_readonly("final_max_xbar", &RunSummary::final_max_xbar)
      .def_readonly("centroid_drift", &RunSummary::centroid_drift)
      .def_readonly("v_monotone", &RunSummary::v_monotone)
      .def("to_json", &summary_to_json);

  m.def("load_scenario", &load_scenario, py::arg("text"));
  m.def("preset", &preset, py::arg("name"));
  m.def("preset_names", &preset_names);
  m.def("run_summary", [](const Scenario& sc) { return run(sc).second; },
        py::arg("scenario"),
        "Certify then simulate a scenario, returning the run summary.");
  m.def("centroid", &centroid);
}
