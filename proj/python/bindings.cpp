#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "toda/acceptance.hpp"
#include "toda/error.hpp"
#include "toda/higgs.hpp"
#include "toda/io.hpp"
#include "toda/maximal.hpp"
#include "toda/monotone_solver.hpp"
#include "toda/run.hpp"

namespace py = pybind11;
using namespace toda;
using nlohmann::json;

namespace {

// dicts cross the boundary as JSON text
json to_json(const py::object& o) { return json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>()); }
py::object to_py(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

py::array_t<double> as_array(const ScalarField& f) {
  py::array_t<double> a(static_cast<py::ssize_t>(f.size()));
  std::copy(f.values().begin(), f.values().end(), a.mutable_data());
  return a;
}

ScalarField from_array(const GridPtr& g, py::array_t<double, py::array::c_style | py::array::forcecast> a) {
  if (a.ndim() != 1 || static_cast<std::size_t>(a.size()) != g->size())
    throw ConfigError("expected a flat array of " + std::to_string(g->size()) + " nodal values");
  return ScalarField(g, std::vector<double>(a.data(), a.data() + a.size()));
}

py::list fields(const std::vector<ScalarField>& f) {
  py::list out;
  for (const auto& x : f) out.append(as_array(x));
  return out;
}

}  // namespace

PYBIND11_MODULE(toda_harmonic, m) {
  m.doc() = "Maximal solutions of the Toda system on the Poincare disk";

  auto base = py::register_exception<Error>(m, "TodaError");
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<ConsistencyError>(m, "ConsistencyError", base.ptr());

  py::class_<PolarGrid, std::shared_ptr<PolarGrid>>(m, "PolarGrid")
      .def_property_readonly("radius", &PolarGrid::radius)
      .def_property_readonly("n_r", &PolarGrid::n_r)
      .def_property_readonly("n_theta", &PolarGrid::n_theta)
      .def_property_readonly("h", &PolarGrid::h)
      .def("__len__", &PolarGrid::size)
      .def("index", &PolarGrid::index, py::arg("ring"), py::arg("angle"))
      .def("rho", [](const PolarGrid& g) {
        std::vector<double> r(g.size());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = g.rho(i);
        return py::array_t<double>(r.size(), r.data());
      })
      .def("theta", [](const PolarGrid& g) {
        std::vector<double> t(g.size());
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = g.theta(i);
        return py::array_t<double>(t.size(), t.data());
      });
  m.def("make_grid", [](double radius, int n_r, int n_theta) { return std::const_pointer_cast<PolarGrid>(make_grid(radius, n_r, n_theta)); },
        py::arg("radius"), py::arg("n_r"), py::arg("n_theta"));

  py::class_<TodaState>(m, "TodaState")
      .def(py::init([](std::shared_ptr<PolarGrid> g, int n, double fill) { return TodaState(g, n, fill); }), py::arg("grid"),
           py::arg("n"), py::arg("fill") = 0.0)
      .def_static("from_arrays",
                  [](std::shared_ptr<PolarGrid> g, const std::vector<py::array_t<double>>& u) {
                    std::vector<ScalarField> f;
                    for (const auto& a : u) f.push_back(from_array(g, a));
                    return TodaState(std::move(f));
                  })
      .def_property_readonly("n", &TodaState::rank)
      .def_property_readonly("grid", [](const TodaState& s) { return std::const_pointer_cast<PolarGrid>(s.grid()); })
      .def_property_readonly("u", [](const TodaState& s) { return fields(s.u); })
      .def("center", [](const TodaState& s) {
        std::vector<double> c;
        for (const auto& f : s.u) c.push_back(f[0]);
        return c;
      });

  py::class_<TodaCoefficients>(m, "TodaCoefficients")
      .def_static("fuchsian", [](std::shared_ptr<PolarGrid> g, int n) { return TodaCoefficients::fuchsian(g, n); })
      .def_static("constant", [](std::shared_ptr<PolarGrid> g, const std::vector<double>& v) { return TodaCoefficients::constant(g, v); })
      .def_static("from_arrays",
                  [](std::shared_ptr<PolarGrid> g, const std::vector<py::array_t<double>>& k) {
                    std::vector<ScalarField> f;
                    for (const auto& a : k) f.push_back(from_array(g, a));
                    return TodaCoefficients(static_cast<int>(f.size()) + 1, std::move(f));
                  })
      .def_static("from_higgs",
                  [](const py::object& h, std::shared_ptr<PolarGrid> g) { return coefficients_from_higgs(HiggsData::from_json(to_json(h)), g); },
                  py::arg("higgs"), py::arg("grid"))
      .def_property_readonly("n", [](const TodaCoefficients& k) { return k.n; })
      .def_property_readonly("k", [](const TodaCoefficients& k) { return fields(k.k); });

  m.def("exact_bubble", [](std::shared_ptr<PolarGrid> g, double r, double delta, int n) { return exact_bubble(g, r, delta, n); },
        py::arg("grid"), py::arg("r"), py::arg("delta"), py::arg("n"));
  m.def("constant_subsolution", &constant_subsolution);
  m.def("torsion_supersolution", &torsion_supersolution, py::arg("k"), py::arg("level"));
  m.def("sup_difference", &sup_difference, py::arg("a"), py::arg("b"), py::arg("radius") = 1.0);

  m.def(
      "solve_dirichlet",
      [](const TodaCoefficients& k, const TodaState& boundary, const TodaState& sub, const TodaState& super, double tol,
         const std::string& scheme, int max_iterations) {
        DirichletProblem p;
        p.k = k;
        p.boundary = boundary;
        p.sub = sub;
        p.super = super;
        p.tol = tol;
        p.scheme = iteration_scheme_from_string(scheme);
        p.max_iterations = max_iterations;
        py::gil_scoped_release release;
        auto r = solve_dirichlet(p);
        py::gil_scoped_acquire acquire;
        return py::make_tuple(r.u, to_py(r.report.to_json()));
      },
      py::arg("k"), py::arg("boundary"), py::arg("sub"), py::arg("super"), py::arg("tol") = 1e-8, py::arg("scheme") = "newton",
      py::arg("max_iterations") = 500, "Monotone Dirichlet solve; returns (state, report dict).");

  m.def(
      "maximal_solution",
      [](const TodaCoefficients& k, const py::object& plan) {
        auto p = plan.is_none() ? ExhaustionPlan{} : ExhaustionPlan::from_json(to_json(plan));
        MaximalResult r;
        {
          py::gil_scoped_release release;
          r = maximal_solution(k, p);
        }
        return py::make_tuple(r.state, r.limit, to_py(r.trace()));
      },
      py::arg("k"), py::arg("plan") = py::none(),
      "Exhaustion; k must live on the plan's finest grid. Returns (state, limit, trace dict).");
  m.def("plan_grid", [](const py::object& plan) {
    auto p = plan.is_none() ? ExhaustionPlan{} : ExhaustionPlan::from_json(to_json(plan));
    return std::const_pointer_cast<PolarGrid>(p.finest_grid());
  }, py::arg("plan") = py::none());

  m.def("higgs_norm", [](const TodaState& u, const TodaCoefficients& k) { return as_array(higgs_norm(u, k)); });
  m.def("fuchsian_norm", &fuchsian_norm);
  m.def("pullback_ratio", [](const TodaState& u, const TodaState& top, const TodaCoefficients& k, double tol) {
    return as_array(pullback_ratio(u, top, k, tol));
  }, py::arg("u"), py::arg("u_max"), py::arg("k"), py::arg("tol") = 1e-8);
  m.def(
      "bergman_integral",
      [](const py::object& f, std::vector<double> radii) {
        return to_py(bergman_integral(Holomorphic::from_json(to_json(f)), std::move(radii)).to_json());
      },
      py::arg("f"), py::arg("radii") = std::vector<double>{0.9, 0.99, 0.999});

  m.def("write_state", &write_state, py::arg("state"), py::arg("dir"), py::arg("stem"));
  m.def("read_state", &read_state, py::arg("manifest"));
  m.def("emit_profile", [](const TodaState& u, const std::string& axis, double rho) {
    return emit_profile(u, profile_axis_from_string(axis), rho);
  }, py::arg("state"), py::arg("axis") = "radial", py::arg("rho") = 0.0);

  m.def(
      "run",
      [](const py::object& config) {
        auto c = RunConfig::from_json(to_json(config));
        std::ostringstream log;
        RunOutcome out;
        {
          py::gil_scoped_release release;
          out = run(c, log);
        }
        return py::make_tuple(out.status, to_py(out.report), log.str());
      },
      py::arg("config"), "Batch command as the CLI runs it; returns (status, report dict, log text).");
  m.def(
      "verify",
      [](const std::vector<int>& only) {
        AcceptanceOptions o;
        o.only = only;
        std::vector<CriterionResult> r;
        {
          py::gil_scoped_release release;
          r = run_acceptance(o);
        }
        return to_py(acceptance_json(r));
      },
      py::arg("only") = std::vector<int>{});
}
