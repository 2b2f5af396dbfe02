#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

#include "epivax/cli.hpp"
#include "epivax/control.hpp"
#include "epivax/errors.hpp"
#include "epivax/models.hpp"
#include "epivax/reproduction.hpp"
#include "epivax/scenario_io.hpp"

namespace py = pybind11;
using namespace epivax;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

py::array_t<double> to_matrix(const std::vector<ode::StateVec>& rows) {
  const std::size_t n = rows.size();
  const std::size_t d = rows.empty() ? 0 : rows.front().size();
  py::array_t<double> out({n, d});
  auto m = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      m(i, j) = rows[i][j];
    }
  }
  return out;
}

py::dict strategy_to_dict(const VaccineStrategy& s) {
  py::dict d;
  const auto j = io::strategy_to_json(s);
  for (const auto& [k, v] : j.items()) {
    if (v.is_string()) {
      d[py::str(k)] = v.get<std::string>();
    } else {
      d[py::str(k)] = v.get<double>();
    }
  }
  return d;
}

VaccineStrategy strategy_from_dict(const py::dict& d) {
  const auto type = d["type"].cast<std::string>();
  auto get = [&](const char* key) {
    if (!d.contains(key)) {
      throw ValidationError(std::string("strategy.") + key, "missing required key");
    }
    return d[key].cast<double>();
  };
  VaccineStrategy s;
  if (type == "none") {
    s = strategy::NoVaccine{};
  } else if (type == "pediatric") {
    s = strategy::Pediatric{get("p")};
  } else if (type == "mass_perfect") {
    s = strategy::MassPerfect{get("psi")};
  } else if (type == "mass_imperfect") {
    s = strategy::MassImperfect{get("psi"), get("sigma")};
  } else if (type == "mass_waning") {
    s = strategy::MassWaning{get("psi"), get("theta")};
  } else {
    throw ValidationError("strategy.type", "unknown strategy tag '" + type + "'");
  }
  validate_strategy(s);
  return s;
}

py::tuple threshold_tuple(const Threshold& t) { return py::make_tuple(t.value, t.already_subcritical); }

py::dict policy_row(const control::PolicyRow& r) {
  py::dict d;
  d["name"] = r.name;
  d["cost"] = r.cost;
  d["peak_infected"] = r.peak_infected;
  d["peak_time"] = r.peak_time;
  d["times"] = to_array(r.infected.times);
  d["infected"] = to_array(r.infected.component(0));
  d["u"] = to_array(r.infected.control);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Dengue vaccination dynamics: simulation, reproduction numbers and optimal control";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<LookupError>(m, "LookupError", base.ptr());
  py::register_exception<ViabilityError>(m, "ViabilityError", base.ptr());
  py::register_exception<IntegrationError>(m, "IntegrationError", base.ptr());
  py::register_exception<ContractViolation>(m, "ContractViolation", base.ptr());

  py::class_<EpiParams>(m, "EpiParams")
      .def(py::init<>())
      .def_readwrite("N_h", &EpiParams::N_h)
      .def_readwrite("B", &EpiParams::B)
      .def_readwrite("beta_mh", &EpiParams::beta_mh)
      .def_readwrite("beta_hm", &EpiParams::beta_hm)
      .def_readwrite("mu_h", &EpiParams::mu_h)
      .def_readwrite("eta_h", &EpiParams::eta_h)
      .def_readwrite("mu_m", &EpiParams::mu_m)
      .def_readwrite("phi", &EpiParams::phi)
      .def_readwrite("mu_A", &EpiParams::mu_A)
      .def_readwrite("eta_A", &EpiParams::eta_A)
      .def_readwrite("m", &EpiParams::m)
      .def_readwrite("k", &EpiParams::k)
      .def("validate", &EpiParams::validate)
      .def("mosquito_viable", &EpiParams::mosquito_viable)
      .def(py::self == py::self);

  py::class_<SysState>(m, "SysState")
      .def(py::init<>())
      .def_readwrite("S_h", &SysState::S_h)
      .def_readwrite("V_h", &SysState::V_h)
      .def_readwrite("I_h", &SysState::I_h)
      .def_readwrite("R_h", &SysState::R_h)
      .def_readwrite("A_m", &SysState::A_m)
      .def_readwrite("S_m", &SysState::S_m)
      .def_readwrite("I_m", &SysState::I_m)
      .def("to_list", [](const SysState& s) {
        const auto a = s.to_array();
        return std::vector<double>(a.begin(), a.end());
      })
      .def("humans", &SysState::humans)
      .def(py::self == py::self);

  py::class_<Scenario>(m, "Scenario")
      .def(py::init<>())
      .def_readwrite("params", &Scenario::params)
      .def_readwrite("initial", &Scenario::initial)
      .def_readwrite("horizon", &Scenario::horizon)
      .def_readwrite("label", &Scenario::label)
      .def_property(
          "strategy", [](const Scenario& s) { return strategy_to_dict(s.strategy); },
          [](Scenario& s, const py::dict& d) { s.strategy = strategy_from_dict(d); })
      .def("validate", &Scenario::validate)
      .def(py::self == py::self);

  py::class_<ode::Trajectory>(m, "Trajectory")
      .def_property_readonly("times", [](const ode::Trajectory& t) { return to_array(t.times); })
      .def_property_readonly("states", [](const ode::Trajectory& t) { return to_matrix(t.states); })
      .def_property_readonly("control", [](const ode::Trajectory& t) { return to_array(t.control); })
      .def("component",
           [](const ode::Trajectory& t, const std::string& name) {
             return to_array(t.component(compartment_index(name)));
           })
      .def("__len__", &ode::Trajectory::size);

  m.attr("COMPARTMENTS") = std::vector<std::string>(kCompartmentNames.begin(), kCompartmentNames.end());
  m.attr("DEFAULT_STEP") = kDefaultStep;

  m.def("preset_scenario", [](const std::string& name) { return preset_scenario(name); }, py::arg("name"));
  m.def("preset_names", &preset_names);
  m.def("disease_free_equilibrium", &disease_free_equilibrium, py::arg("params"), py::arg("p") = 0.0);
  m.def(
      "simulate", [](const Scenario& s, double step) { return simulate(s, step); }, py::arg("scenario"),
      py::arg("step") = kDefaultStep, py::call_guard<py::gil_scoped_release>());
  m.def(
      "peak",
      [](const ode::Trajectory& t, const std::string& name) {
        const auto p = peak(t, name);
        return py::make_tuple(p.time, p.value);
      },
      py::arg("trajectory"), py::arg("compartment") = "I_h");

  m.def("r0_baseline", &r0_baseline, py::arg("params"));
  m.def("r0_pediatric", &r0_pediatric, py::arg("params"), py::arg("p"));
  m.def("r0_mass", &r0_mass, py::arg("params"), py::arg("psi"));
  m.def("r0_imperfect", &r0_imperfect, py::arg("params"), py::arg("psi"), py::arg("sigma"));
  m.def("r0_waning", &r0_waning, py::arg("params"), py::arg("psi"));
  m.def(
      "critical_pediatric_coverage",
      [](const EpiParams& p) { return threshold_tuple(critical_pediatric_coverage(p)); }, py::arg("params"));
  m.def(
      "critical_mass_rate", [](const EpiParams& p) { return threshold_tuple(critical_mass_rate(p)); },
      py::arg("params"));

  py::class_<control::ControlProblem>(m, "ControlProblem")
      .def(py::init([](const Scenario& s) { return control::ControlProblem::from_scenario(s); }),
           py::arg("scenario"))
      .def_readwrite("scenario", &control::ControlProblem::scenario)
      .def_readwrite("gamma_D", &control::ControlProblem::gamma_D)
      .def_readwrite("gamma_V", &control::ControlProblem::gamma_V)
      .def_readwrite("theta", &control::ControlProblem::theta)
      .def_readwrite("u_min", &control::ControlProblem::u_min)
      .def_readwrite("u_max", &control::ControlProblem::u_max)
      .def_readwrite("horizon", &control::ControlProblem::horizon)
      .def_readwrite("step", &control::ControlProblem::step)
      .def("validate", &control::ControlProblem::validate);

  py::class_<control::SolveReport>(m, "SolveReport")
      .def_readonly("cost", &control::SolveReport::cost)
      .def_readonly("iterations", &control::SolveReport::iterations)
      .def_readonly("converged", &control::SolveReport::converged)
      .def_readonly("piece_values", &control::SolveReport::piece_values)
      .def_readonly("cost_history", &control::SolveReport::cost_history)
      .def_readonly("final_delta", &control::SolveReport::final_delta)
      .def_property_readonly("method", [](const control::SolveReport& r) { return control::to_string(r.method); })
      .def_property_readonly("times", [](const control::SolveReport& r) { return to_array(r.states.times); })
      .def_property_readonly("u", [](const control::SolveReport& r) { return to_array(r.control.u); })
      .def_property_readonly("states", [](const control::SolveReport& r) { return to_matrix(r.states.states); })
      .def_property_readonly("adjoints",
                             [](const control::SolveReport& r) { return to_matrix(r.adjoints.states); });

  m.def(
      "solve_indirect",
      [](const control::ControlProblem& p, double relaxation, double tolerance, std::size_t max_iter) {
        control::SweepConfig c;
        c.relaxation = relaxation;
        c.tolerance = tolerance;
        c.max_iter = max_iter;
        return control::solve_indirect(p, c);
      },
      py::arg("problem"), py::arg("relaxation") = 0.5, py::arg("tolerance") = 1e-6, py::arg("max_iter") = 2000,
      py::call_guard<py::gil_scoped_release>());
  m.def(
      "solve_direct",
      [](const control::ControlProblem& p, std::size_t n_intervals, std::vector<double> starts,
         std::size_t max_iter) {
        control::DirectConfig c;
        c.n_intervals = n_intervals;
        c.starts = std::move(starts);
        c.max_iter = max_iter;
        return control::solve_direct(p, c);
      },
      py::arg("problem"), py::arg("n_intervals") = 10,
      py::arg("starts") = std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0}, py::arg("max_iter") = 500,
      py::call_guard<py::gil_scoped_release>());
  m.def("evaluate_constant_policy", &control::evaluate_constant_policy, py::arg("problem"), py::arg("u"));
  m.def(
      "compare_policies",
      [](const control::ControlProblem& p) {
        control::PolicyComparison c;
        {
          py::gil_scoped_release release;
          c = control::compare_policies(p);
        }
        py::dict d;
        d["optimal"] = policy_row(c.optimal);
        d["no_control"] = policy_row(c.no_control);
        d["upper_control"] = policy_row(c.upper_control);
        return d;
      },
      py::arg("problem"));

  m.def(
      "parse_scenario", [](const std::string& text) { return io::parse_scenario(text).scenario; },
      py::arg("text"));
  m.def(
      "trajectory_csv", [](const ode::Trajectory& t) { return io::format_trajectory_csv(t); },
      py::arg("trajectory"));
  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"epivax"};
        for (const auto& a : args) {
          argv.push_back(a.c_str());
        }
        std::ostringstream out;
        std::ostringstream err;
        const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
