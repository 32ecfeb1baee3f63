#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cfshrink/canonical.hpp"
#include "cfshrink/errors.hpp"
#include "cfshrink/estimators.hpp"
#include "cfshrink/invariance.hpp"
#include "cfshrink/model.hpp"
#include "cfshrink/oracle.hpp"
#include "cfshrink/rng.hpp"
#include "cfshrink/sim.hpp"

namespace py = pybind11;
using namespace cfshrink;

PYBIND11_MODULE(_core, m) {
  m.doc() = "control-function shrinkage IV estimation toolkit (C++ core)";

  py::register_exception<config_error>(m, "ConfigError", PyExc_ValueError);
  auto numeric = py::register_exception<numeric_error>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<degenerate_first_stage>(m, "DegenerateFirstStage", numeric);
  py::register_exception<estimator_undefined>(m, "EstimatorUndefined", numeric);
  py::register_exception<divergence_error>(m, "DivergenceError", numeric);

  py::class_<RngStream>(m, "RngStream")
      .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("master_seed"),
           py::arg("stream_index") = 0)
      .def("normal", &RngStream::normal)
      .def("uniform01", &RngStream::uniform01)
      .def_property_readonly_static(
          "generator_name", [](py::object) { return RngStream::kGeneratorName; });

  // --- model ---
  py::class_<StructuralParams>(m, "StructuralParams")
      .def(py::init<>())
      .def_readwrite("beta", &StructuralParams::beta)
      .def_readwrite("alpha", &StructuralParams::alpha)
      .def_readwrite("gamma", &StructuralParams::gamma)
      .def_readwrite("alpha_x", &StructuralParams::alpha_x)
      .def_readwrite("gamma_x", &StructuralParams::gamma_x)
      .def_readwrite("pi", &StructuralParams::pi)
      .def_readwrite("rho", &StructuralParams::rho)
      .def_readwrite("sigma", &StructuralParams::sigma)
      .def_readwrite("tau", &StructuralParams::tau)
      .def("validate", &StructuralParams::validate);

  py::class_<ReducedFormParams>(m, "ReducedFormParams")
      .def_readonly("pi_y", &ReducedFormParams::pi_y)
      .def_readonly("gamma_y", &ReducedFormParams::gamma_y)
      .def_readonly("Sigma", &ReducedFormParams::Sigma);

  py::class_<CanonicalParams>(m, "CanonicalParams")
      .def(py::init<>())
      .def(py::init([](double beta, const VectorXd& mu, double rho, double sigma,
                       double tau) {
             return CanonicalParams{beta, mu, rho, sigma, tau};
           }),
           py::arg("beta"), py::arg("mu"), py::arg("rho"), py::arg("sigma"),
           py::arg("tau"))
      .def_readwrite("beta", &CanonicalParams::beta)
      .def_readwrite("mu", &CanonicalParams::mu)
      .def_readwrite("rho", &CanonicalParams::rho)
      .def_readwrite("sigma", &CanonicalParams::sigma)
      .def_readwrite("tau", &CanonicalParams::tau)
      .def("validate", &CanonicalParams::validate);

  py::class_<CanonicalData>(m, "CanonicalData")
      .def(py::init<>())
      .def(py::init([](const VectorXd& x_z, const VectorXd& x_r, const VectorXd& y_z,
                       const VectorXd& y_r) {
             return CanonicalData{x_z, x_r, y_z, y_r};
           }),
           py::arg("x_z"), py::arg("x_r"), py::arg("y_z"), py::arg("y_r"))
      .def_readwrite("x_z", &CanonicalData::x_z)
      .def_readwrite("x_r", &CanonicalData::x_r)
      .def_readwrite("y_z", &CanonicalData::y_z)
      .def_readwrite("y_r", &CanonicalData::y_r);

  py::class_<RawDataset>(m, "RawDataset")
      .def_readonly("y", &RawDataset::y)
      .def_readonly("x", &RawDataset::x)
      .def_readonly("z", &RawDataset::z)
      .def_readonly("w", &RawDataset::w);

  m.def("reduced_form", &reduced_form, py::arg("params"));
  m.def("sample_raw", &sample_raw, py::arg("params"), py::arg("z"), py::arg("w"),
        py::arg("rng"));
  m.def("sample_canonical", &sample_canonical, py::arg("theta"), py::arg("ell"),
        py::arg("s"), py::arg("rng"));
  m.def("log_density", &log_density, py::arg("theta"), py::arg("data"));

  // --- canonical ---
  py::class_<OrthoBasis>(m, "OrthoBasis")
      .def_readonly("q1", &OrthoBasis::q1)
      .def_readonly("qw", &OrthoBasis::qw)
      .def_readonly("qz", &OrthoBasis::qz)
      .def_readonly("qr", &OrthoBasis::qr);

  m.def("build_basis", &build_basis, py::arg("z"), py::arg("w"));
  m.def("to_canonical", &to_canonical, py::arg("data"), py::arg("basis"));
  m.def("canonical_mu", &canonical_mu, py::arg("pi"), py::arg("z"), py::arg("basis"));

  // --- estimators ---
  py::enum_<Shrinkage>(m, "Shrinkage")
      .value("none", Shrinkage::none)
      .value("james_stein", Shrinkage::james_stein)
      .value("james_stein_positive", Shrinkage::james_stein_positive)
      .value("harmonic", Shrinkage::harmonic);

  py::class_<ShrinkageSpec>(m, "ShrinkageSpec")
      .def(py::init<>())
      .def(py::init([](Shrinkage variant, double p) {
             return ShrinkageSpec{variant, p};
           }),
           py::arg("variant"), py::arg("p"))
      .def_readwrite("variant", &ShrinkageSpec::variant)
      .def_readwrite("p", &ShrinkageSpec::p);

  m.def("default_tuning", &default_tuning, py::arg("ell"), py::arg("s"));
  m.def("shrinkage_factor", &shrinkage_factor, py::arg("spec"), py::arg("sq_z"),
        py::arg("sq_r"));
  m.def("cf_beta", &cf_beta, py::arg("data"), py::arg("mu_hat"));
  m.def("shrink_iv_beta", &shrink_iv_beta, py::arg("data"), py::arg("spec"));
  m.def("tsls_beta", &tsls_beta, py::arg("data"));
  m.def("ols_beta", &ols_beta, py::arg("data"));

  // --- oracle ---
  py::class_<BiasReport>(m, "BiasReport")
      .def_readonly("ell", &BiasReport::ell)
      .def_readonly("kappa", &BiasReport::kappa)
      .def_readonly("P", &BiasReport::P)
      .def_readonly("Q", &BiasReport::Q)
      .def_readonly("lam", &BiasReport::lambda)
      .def_readonly("B", &BiasReport::B)
      .def_readonly("lambda_star", &BiasReport::lambda_star)
      .def_readonly("bias_unscaled", &BiasReport::bias_unscaled);

  m.def("conditional_bias", &conditional_bias, py::arg("theta"), py::arg("x_z"),
        py::arg("c"));
  m.def("conditional_mean", &conditional_mean, py::arg("theta"), py::arg("x_z"),
        py::arg("x_r"), py::arg("weight"));
  m.def("poisson_PQ", &poisson_PQ, py::arg("ell"), py::arg("kappa"));
  m.def("bias_B", &bias_B, py::arg("ell"), py::arg("kappa"), py::arg("lam"));
  m.def("lambda_star", &lambda_star, py::arg("ell"), py::arg("kappa"));
  m.def("poisson_inverse_moment", &poisson_inverse_moment, py::arg("a"), py::arg("nu"));
  m.def("poisson_inverse_moment_bound", &poisson_inverse_moment_bound, py::arg("a"),
        py::arg("nu"));
  m.def("bias_report", &bias_report, py::arg("ell"), py::arg("kappa"), py::arg("lam"),
        py::arg("rho"), py::arg("sigma"), py::arg("tau"));

  // --- invariance ---
  py::class_<GroupElement>(m, "GroupElement")
      .def(py::init<>())
      .def_static("identity", &GroupElement::identity, py::arg("ell"), py::arg("s"))
      .def_readwrite("g_beta", &GroupElement::g_beta)
      .def_readwrite("g_z", &GroupElement::g_z)
      .def_readwrite("g_r", &GroupElement::g_r)
      .def("compose", &GroupElement::compose, py::arg("first"))
      .def("validate", &GroupElement::validate, py::arg("tol") = 1e-10);

  py::enum_<Verdict>(m, "Verdict")
      .value("pass_", Verdict::pass)
      .value("fail", Verdict::fail)
      .value("inconclusive", Verdict::inconclusive);

  py::class_<InvarianceCheck>(m, "InvarianceCheck")
      .def_readonly("verdict", &InvarianceCheck::verdict)
      .def_readonly("residual", &InvarianceCheck::residual)
      .def_readonly("note", &InvarianceCheck::note);

  py::class_<SuiteCheck>(m, "SuiteCheck")
      .def_readonly("name", &SuiteCheck::name)
      .def_readonly("max_residual", &SuiteCheck::max_residual)
      .def_readonly("n_pass", &SuiteCheck::n_pass)
      .def_readonly("n_fail", &SuiteCheck::n_fail)
      .def_readonly("n_inconclusive", &SuiteCheck::n_inconclusive);

  py::class_<InvarianceSuiteResult>(m, "InvarianceSuiteResult")
      .def_readonly("checks", &InvarianceSuiteResult::checks)
      .def_readonly("trials", &InvarianceSuiteResult::trials)
      .def_readonly("tol", &InvarianceSuiteResult::tol)
      .def("passed", &InvarianceSuiteResult::passed);

  m.def("act_sample", &act_sample, py::arg("g"), py::arg("data"));
  m.def("act_param", &act_param, py::arg("g"), py::arg("theta"));
  m.def("act_action", &act_action, py::arg("g"), py::arg("a"));
  m.def("random_group", &random_group, py::arg("rng"), py::arg("ell"), py::arg("s"),
        py::arg("beta_scale"));
  m.def("check_rule_invariance", &check_rule_invariance, py::arg("rule"), py::arg("g"),
        py::arg("data"), py::arg("tol"));
  m.def("run_invariance_suite", &run_invariance_suite, py::arg("ell"), py::arg("s"),
        py::arg("trials"), py::arg("seed"), py::arg("tol") = 1e-8,
        py::arg("shear_only_z") = false);

  // --- sim ---
  py::enum_<SimMode>(m, "SimMode")
      .value("full", SimMode::full)
      .value("rao_blackwell", SimMode::rao_blackwell);

  py::enum_<Dominance>(m, "Dominance")
      .value("self", Dominance::self)
      .value("dominates", Dominance::dominates)
      .value("tie", Dominance::tie)
      .value("dominated", Dominance::dominated);

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("ell", &SimConfig::ell)
      .def_readwrite("s", &SimConfig::s)
      .def_readwrite("kappa", &SimConfig::kappa)
      .def_readwrite("mu", &SimConfig::mu)
      .def_readwrite("beta", &SimConfig::beta)
      .def_readwrite("rho", &SimConfig::rho)
      .def_readwrite("sigma", &SimConfig::sigma)
      .def_readwrite("tau", &SimConfig::tau)
      .def_readwrite("specs", &SimConfig::specs)
      .def_readwrite("reps", &SimConfig::reps)
      .def_readwrite("seed", &SimConfig::seed)
      .def_readwrite("mode", &SimConfig::mode)
      .def("resolved_mu", &SimConfig::resolved_mu)
      .def("resolved_kappa", &SimConfig::resolved_kappa)
      .def("validate", &SimConfig::validate);

  py::class_<EstimatorRow>(m, "EstimatorRow")
      .def_readonly("name", &EstimatorRow::name)
      .def_readonly("lam", &EstimatorRow::lambda)
      .def_readonly("emp_bias", &EstimatorRow::emp_bias)
      .def_readonly("mc_se", &EstimatorRow::mc_se)
      .def_readonly("n_divergent", &EstimatorRow::n_divergent)
      .def_readonly("oracle_bias", &EstimatorRow::oracle_bias)
      .def_readonly("se_diff_vs_tsls", &EstimatorRow::se_diff_vs_tsls)
      .def_readonly("verdict", &EstimatorRow::verdict);

  py::class_<SimResult>(m, "SimResult")
      .def_readonly("rows", &SimResult::rows)
      .def_readonly("reps", &SimResult::reps)
      .def_readonly("seed", &SimResult::seed)
      .def_readonly("mode", &SimResult::mode)
      .def_readonly("wall_seconds", &SimResult::wall_seconds)
      .def_readonly("rng_name", &SimResult::rng_name);

  m.def("compare_estimators", &compare_estimators, py::arg("cfg"),
        py::arg("workers") = 1, py::call_guard<py::gil_scoped_release>());
  m.def("run_bias_mc", &run_bias_mc, py::arg("cfg"), py::arg("workers") = 1,
        py::call_guard<py::gil_scoped_release>());

#ifdef CFSHRINK_VERSION
  m.attr("__version__") = CFSHRINK_VERSION;
#else
  m.attr("__version__") = "dev";
#endif
}
