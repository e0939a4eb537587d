// Python bindings for the main library operations.
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "curve_equiv/bootstrap.hpp"
#include "curve_equiv/data.hpp"
#include "curve_equiv/distance.hpp"
#include "curve_equiv/errors.hpp"
#include "curve_equiv/fit.hpp"
#include "curve_equiv/inference.hpp"
#include "curve_equiv/model.hpp"
#include "curve_equiv/rng.hpp"
#include "curve_equiv/simstudy.hpp"

namespace py = pybind11;
using namespace curve_equiv;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Equivalence of two parametric regression curves by the area between them";

    py::register_exception<input_error>(m, "InputError", PyExc_ValueError);
    py::register_exception<procedure_error>(m, "ProcedureError", PyExc_RuntimeError);

    py::class_<Domain>(m, "Domain")
        .def(py::init([](double lo, double hi) { return Domain{lo, hi}; }), py::arg("lo") = 0.0,
             py::arg("hi") = 4.0)
        .def_readwrite("lo", &Domain::lo)
        .def_readwrite("hi", &Domain::hi)
        .def("length", &Domain::length);

    py::class_<ParameterBox>(m, "ParameterBox")
        .def(py::init([](std::vector<double> lo, std::vector<double> hi) {
                 return ParameterBox{std::move(lo), std::move(hi)};
             }),
             py::arg("lo"), py::arg("hi"))
        .def_readwrite("lo", &ParameterBox::lo)
        .def_readwrite("hi", &ParameterBox::hi)
        .def("midpoint", &ParameterBox::midpoint);

    py::class_<ModelSpec>(m, "ModelSpec")
        .def_static("emax", &ModelSpec::emax, py::arg("domain") = Domain{})
        .def_static("linear", &ModelSpec::linear, py::arg("domain") = Domain{})
        .def_static("exponential", &ModelSpec::exponential, py::arg("domain") = Domain{})
        .def_static("quadratic", &ModelSpec::quadratic, py::arg("domain") = Domain{})
        .def_static("by_name", &ModelSpec::by_name, py::arg("family"),
                    py::arg("domain") = Domain{})
        .def("with_box", &ModelSpec::with_box, py::arg("box"))
        .def("eval", &ModelSpec::eval, py::arg("x"), py::arg("beta"))
        .def("grad",
             static_cast<ParameterVector (ModelSpec::*)(double, const ParameterVector&) const>(
                 &ModelSpec::grad),
             py::arg("x"), py::arg("beta"))
        .def_property_readonly("dim", &ModelSpec::dim)
        .def_property_readonly("name", &ModelSpec::name)
        .def_property_readonly("domain", &ModelSpec::domain)
        .def_property_readonly("box", &ModelSpec::box);

    py::class_<GroupSample>(m, "GroupSample")
        .def(py::init<>())
        .def_readwrite("levels", &GroupSample::levels)
        .def_readwrite("obs", &GroupSample::obs)
        .def("add", &GroupSample::add, py::arg("dose"), py::arg("y"))
        .def("n_total", &GroupSample::n_total)
        .def("level_means", &GroupSample::level_means);

    py::class_<TwoGroupData>(m, "TwoGroupData")
        .def(py::init<>())
        .def_readwrite("group1", &TwoGroupData::group1)
        .def_readwrite("group2", &TwoGroupData::group2)
        .def("n", &TwoGroupData::n);

    m.def("kappa_hat", &kappa_hat, py::arg("data"));
    m.def("load_csv", &load_csv, py::arg("path"));
    m.def("save_csv", &save_csv, py::arg("data"), py::arg("path"));

    py::class_<FitOptions>(m, "FitOptions")
        .def(py::init<>())
        .def_readwrite("max_iter", &FitOptions::max_iter)
        .def_readwrite("n_starts", &FitOptions::n_starts);

    py::class_<FittedGroup>(m, "FittedGroup")
        .def_readonly("beta_hat", &FittedGroup::beta_hat)
        .def_readonly("sigma2_hat", &FittedGroup::sigma2_hat)
        .def_readonly("sse", &FittedGroup::sse)
        .def_readonly("converged", &FittedGroup::converged)
        .def_readonly("iterations", &FittedGroup::iterations)
        .def_readonly("underdetermined", &FittedGroup::underdetermined);

    py::class_<FittedPair>(m, "FittedPair")
        .def_readonly("g1", &FittedPair::g1)
        .def_readonly("g2", &FittedPair::g2)
        .def_readonly("kappa_hat", &FittedPair::kappa_hat);

    m.def("ls_fit", &ls_fit, py::arg("spec"), py::arg("group"), py::arg("start"),
          py::arg("options") = FitOptions{});
    m.def("fit_both", &fit_both, py::arg("spec1"), py::arg("spec2"), py::arg("data"),
          py::arg("start1"), py::arg("start2"), py::arg("options") = FitOptions{});

    py::class_<Interval>(m, "Interval")
        .def_readonly("lo", &Interval::lo)
        .def_readonly("hi", &Interval::hi)
        .def("length", &Interval::length);

    m.def(
        "l1_distance",
        [](const ModelSpec& m1, const ParameterVector& b1, const ModelSpec& m2,
           const ParameterVector& b2) { return l1_distance(m1, b1, m2, b2); },
        py::arg("spec1"), py::arg("beta1"), py::arg("spec2"), py::arg("beta2"));
    m.def(
        "estimate_null_set",
        [](const ModelSpec& m1, const ParameterVector& b1, const ModelSpec& m2,
           const ParameterVector& b2, std::size_t n, double const_c) {
            return estimate_null_set(DiffCurve(m1, b1, m2, b2), n, const_c).parts();
        },
        py::arg("spec1"), py::arg("beta1"), py::arg("spec2"), py::arg("beta2"), py::arg("n"),
        py::arg("const_c") = 1.0);

    py::class_<CiReport>(m, "CiReport")
        .def_readonly("method", &CiReport::method)
        .def_readonly("two_sided", &CiReport::two_sided)
        .def_readonly("lower", &CiReport::lower)
        .def_readonly("upper", &CiReport::upper)
        .def_readonly("alpha", &CiReport::alpha)
        .def_readonly("d1_hat", &CiReport::d1_hat)
        .def_readonly("quantiles_used", &CiReport::quantiles_used)
        .def_readonly("n", &CiReport::n)
        .def_readonly("reps", &CiReport::reps)
        .def_readonly("seed", &CiReport::seed)
        .def_readonly("kappa", &CiReport::kappa)
        .def_readonly("dropped", &CiReport::dropped)
        .def_readonly("degenerate", &CiReport::degenerate)
        .def_readonly("null_set", &CiReport::null_set);

    py::class_<TestReport>(m, "TestReport")
        .def_readonly("method", &TestReport::method)
        .def_readonly("reject", &TestReport::reject)
        .def_readonly("d1_hat", &TestReport::d1_hat)
        .def_readonly("eps", &TestReport::eps)
        .def_readonly("alpha", &TestReport::alpha)
        .def_readonly("critical", &TestReport::critical)
        .def_readonly("quantiles_used", &TestReport::quantiles_used)
        .def_readonly("n", &TestReport::n)
        .def_readonly("reps", &TestReport::reps)
        .def_readonly("seed", &TestReport::seed)
        .def_readonly("dropped", &TestReport::dropped)
        .def_readonly("degenerate", &TestReport::degenerate)
        .def_readonly("branch", &TestReport::branch)
        .def_readonly("gen_d1", &TestReport::gen_d1)
        .def_readonly("constraint_gap", &TestReport::constraint_gap)
        .def_readonly("sn_threshold", &TestReport::sn_threshold)
        .def_readonly("null_set", &TestReport::null_set);

    m.def("asymptotic_ci", &asymptotic_ci, py::arg("spec1"), py::arg("spec2"), py::arg("pair"),
          py::arg("data"), py::arg("alpha") = 0.05, py::arg("M") = 10000, py::arg("seed") = 0,
          py::arg("const_c") = 1.0);
    m.def("two_sided_ci", &two_sided_ci, py::arg("spec1"), py::arg("spec2"), py::arg("pair"),
          py::arg("data"), py::arg("alpha") = 0.05, py::arg("M") = 10000, py::arg("seed") = 0,
          py::arg("const_c") = 1.0);
    m.def("asymptotic_test", &asymptotic_test, py::arg("spec1"), py::arg("spec2"),
          py::arg("pair"), py::arg("data"), py::arg("eps"), py::arg("alpha") = 0.05,
          py::arg("M") = 10000, py::arg("seed") = 0, py::arg("const_c") = 1.0);

    py::class_<BootstrapConfig>(m, "BootstrapConfig")
        .def(py::init<>())
        .def_readwrite("B", &BootstrapConfig::B)
        .def_readwrite("alpha", &BootstrapConfig::alpha)
        .def_readwrite("eps", &BootstrapConfig::eps)
        .def_readwrite("seed", &BootstrapConfig::seed)
        .def_readwrite("max_dropped_frac", &BootstrapConfig::max_dropped_frac)
        .def_readwrite("resample_unconstrained", &BootstrapConfig::resample_unconstrained)
        .def_readwrite("sn_rule", &BootstrapConfig::sn_rule)
        .def_readwrite("fit", &BootstrapConfig::fit)
        .def_readwrite("start1", &BootstrapConfig::start1)
        .def_readwrite("start2", &BootstrapConfig::start2);

    m.def("bootstrap_ci", &bootstrap_ci, py::arg("spec1"), py::arg("spec2"), py::arg("data"),
          py::arg("config"));
    m.def("bootstrap_ci_test", &bootstrap_ci_test, py::arg("spec1"), py::arg("spec2"),
          py::arg("data"), py::arg("config"));
    m.def("constrained_bootstrap_test", &constrained_bootstrap_test, py::arg("spec1"),
          py::arg("spec2"), py::arg("data"), py::arg("config"));
    m.def("derivative_bootstrap_test", &derivative_bootstrap_test, py::arg("spec1"),
          py::arg("spec2"), py::arg("data"), py::arg("config"));
    m.def("default_sn", &default_sn, py::arg("n"));

    py::enum_<ScenarioShape>(m, "ScenarioShape")
        .value("intersecting", ScenarioShape::intersecting)
        .value("parallel", ScenarioShape::parallel);

    py::class_<Scenario>(m, "Scenario")
        .def(py::init<>())
        .def_readwrite("shape", &Scenario::shape)
        .def_readwrite("value", &Scenario::value)
        .def_readwrite("n1", &Scenario::n1)
        .def_readwrite("n2", &Scenario::n2)
        .def_readwrite("sigma2_1", &Scenario::sigma2_1)
        .def_readwrite("sigma2_2", &Scenario::sigma2_2)
        .def_readwrite("levels", &Scenario::levels)
        .def_readwrite("eps", &Scenario::eps)
        .def_readwrite("alpha", &Scenario::alpha)
        .def_readwrite("reps", &Scenario::reps)
        .def_readwrite("B", &Scenario::B)
        .def_readwrite("M", &Scenario::M)
        .def_readwrite("const_c", &Scenario::const_c);

    py::enum_<RunMethod>(m, "RunMethod")
        .value("asymptotic", RunMethod::asymptotic)
        .value("bootstrap_ci", RunMethod::bootstrap_ci)
        .value("constrained_bootstrap", RunMethod::constrained_bootstrap)
        .value("derivative_bootstrap", RunMethod::derivative_bootstrap);

    py::class_<MethodOC>(m, "MethodOC")
        .def_readonly("method", &MethodOC::method)
        .def_readonly("rate", &MethodOC::rate)
        .def_readonly("se", &MethodOC::se)
        .def_readonly("successes", &MethodOC::successes)
        .def_readonly("completed", &MethodOC::completed)
        .def_readonly("errors", &MethodOC::errors)
        .def_readonly("seconds", &MethodOC::seconds);

    py::class_<OperatingCharacteristics>(m, "OperatingCharacteristics")
        .def_readonly("true_d1", &OperatingCharacteristics::true_d1)
        .def_readonly("methods", &OperatingCharacteristics::methods);

    m.def("scenario_d1", &scenario_d1, py::arg("shape"), py::arg("value"));
    m.def("gamma_for_d1", &gamma_for_d1, py::arg("target_d1"));
    m.def("delta_for_d1", &delta_for_d1, py::arg("target_d1"));
    m.def("make_scenario_data", &make_scenario_data, py::arg("scenario"), py::arg("seed"));
    m.def("scenario_model", &scenario_model);
    m.def("run_power", &run_power, py::arg("scenario"), py::arg("methods"), py::arg("seed"));
    m.def("run_coverage", &run_coverage, py::arg("scenario"), py::arg("methods"),
          py::arg("seed"));

    m.def("derive_seed", &derive_seed, py::arg("seed"), py::arg("index"));
}
