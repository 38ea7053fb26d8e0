// SPDX-License-Identifier: Apache-2.0
// Python bindings for the plaintext MPC math, the surrogate toolbox, and the
// simulation harness. The CKKS engine stays behind the harness: python
// callers pick a mode and run closed loops rather than driving ciphertexts.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vempc/common.hpp"
#include "vempc/harness.hpp"
#include "vempc/mpc.hpp"
#include "vempc/qp.hpp"
#include "vempc/surrogate.hpp"

namespace py = pybind11;
using namespace vempc;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Variational encrypted MPC core";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  // ------------------------------------------------------------- mpc math

  py::class_<PlantModel>(m, "PlantModel")
      .def(py::init<>())
      .def_readwrite("A", &PlantModel::A)
      .def_readwrite("B", &PlantModel::B)
      .def_readwrite("dt", &PlantModel::dt)
      .def_property_readonly("n", &PlantModel::n)
      .def_property_readonly("m", &PlantModel::m);

  py::class_<ConstraintSpec>(m, "ConstraintSpec")
      .def(py::init<>())
      .def_readwrite("state_bounds", &ConstraintSpec::state_bounds)
      .def_readwrite("input_bounds", &ConstraintSpec::input_bounds)
      .def_readwrite("G_raw", &ConstraintSpec::G_raw)
      .def_readwrite("h_raw", &ConstraintSpec::h_raw)
      .def_readwrite("E_raw", &ConstraintSpec::E_raw);

  py::class_<MpcProblem>(m, "MpcProblem")
      .def(py::init<>())
      .def_readwrite("N", &MpcProblem::N)
      .def_readwrite("Q", &MpcProblem::Q)
      .def_readwrite("Qf", &MpcProblem::Qf)
      .def_readwrite("R", &MpcProblem::R)
      .def_readwrite("constraints", &MpcProblem::constraints);

  py::class_<CondensedQp>(m, "CondensedQp")
      .def_readonly("Lambda", &CondensedQp::Lambda)
      .def_readonly("Psi", &CondensedQp::Psi)
      .def_readonly("H", &CondensedQp::H)
      .def_readonly("S", &CondensedQp::S)
      .def_readonly("P", &CondensedQp::P);

  py::class_<LinearConstraints>(m, "LinearConstraints")
      .def_readonly("G", &LinearConstraints::G)
      .def_readonly("h_const", &LinearConstraints::h_const)
      .def_readonly("E", &LinearConstraints::E)
      .def_property_readonly("p", &LinearConstraints::p)
      .def("h", &LinearConstraints::h, py::arg("x0"))
      .def("residual", &LinearConstraints::residual, py::arg("U"), py::arg("x0"));

  py::class_<TiltedGaussian>(m, "TiltedGaussian")
      .def_readonly("Sigma0", &TiltedGaussian::Sigma0)
      .def_readonly("SigmaU", &TiltedGaussian::SigmaU)
      .def_readonly("L", &TiltedGaussian::L)
      .def_readonly("Gamma", &TiltedGaussian::Gamma)
      .def_readonly("lambda_", &TiltedGaussian::lambda)
      .def("mean", &TiltedGaussian::mean, py::arg("x0"))
      .def("offset", &TiltedGaussian::offset, py::arg("x0"));

  py::class_<SampleBatch>(m, "SampleBatch")
      .def_readonly("seed", &SampleBatch::seed)
      .def_readonly("xi", &SampleBatch::xi)
      .def_readonly("U", &SampleBatch::U)
      .def_readonly("g", &SampleBatch::g);

  m.def("condense_cost", &condense_cost, py::arg("model"), py::arg("problem"));
  m.def("build_constraints", &build_constraints, py::arg("spec"), py::arg("model"),
        py::arg("N"), py::arg("Lambda"), py::arg("Psi"));
  m.def("tilt", &tilt, py::arg("qp"), py::arg("lc"), py::arg("Sigma0"),
        py::arg("lambda_"));
  m.def("sample_tilted", &sample_tilted, py::arg("tg"), py::arg("x0"), py::arg("K"),
        py::arg("seed"));
  m.def("violation_score", &violation_score, py::arg("g"));
  m.def("estimate", &estimate, py::arg("U"), py::arg("weights"));
  m.def("rollout_cost", &rollout_cost, py::arg("model"), py::arg("problem"),
        py::arg("x0"), py::arg("U"));

  py::class_<QpResult>(m, "QpResult")
      .def_readonly("U", &QpResult::U)
      .def_readonly("iterations", &QpResult::iterations)
      .def_readonly("primal_residual", &QpResult::primal_residual)
      .def_readonly("dual_residual", &QpResult::dual_residual);

  m.def("reference_qp_solve", &reference_qp_solve, py::arg("qp"), py::arg("lc"),
        py::arg("x0"), py::arg("tol") = 1e-8, py::arg("max_iter") = 100000);

  // ------------------------------------------------------------ surrogate

  py::class_<Surrogate>(m, "Surrogate")
      .def_readonly("ell", &Surrogate::ell)
      .def_readonly("B", &Surrogate::B)
      .def_readonly("coeffs", &Surrogate::coeffs)
      .def_readonly("delta", &Surrogate::delta)
      .def("eval", &Surrogate::eval, py::arg("gamma"));

  py::class_<WeightRule>(m, "WeightRule")
      .def(py::init<>())
      .def_readwrite("tau_s", &WeightRule::tau_s)
      .def_readwrite("eta", &WeightRule::eta);

  m.def("chebyshev_fit", &chebyshev_fit, py::arg("ell"), py::arg("B"));
  m.def("surrogate_score", &surrogate_score, py::arg("sur"), py::arg("g"));
  m.def("threshold_weight", &threshold_weight, py::arg("rule"), py::arg("s_ell"));
  m.def("auto_domain_bound", &auto_domain_bound, py::arg("tg"),
        py::arg("operating_box"), py::arg("z") = 4.0);

  // -------------------------------------------------------------- harness

  py::enum_<RunMode>(m, "RunMode")
      .value("qp", RunMode::kQp)
      .value("variational", RunMode::kVariational)
      .value("vempc_mock", RunMode::kVempcMock)
      .value("vempc_ckks", RunMode::kVempcCkks);

  m.def("parse_mode", &parse_mode, py::arg("name"));
  m.def("mode_name", &mode_name, py::arg("mode"));

  py::class_<NoiseModel>(m, "NoiseModel")
      .def(py::init<>())
      .def_readwrite("e_enc", &NoiseModel::e_enc)
      .def_readwrite("e_mult", &NoiseModel::e_mult)
      .def_readwrite("e_rot", &NoiseModel::e_rot);

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("model", &SimConfig::model)
      .def_readwrite("problem", &SimConfig::problem)
      .def_readwrite("sigma0", &SimConfig::sigma0)
      .def_readwrite("lambda_", &SimConfig::lambda)
      .def_readwrite("K", &SimConfig::K)
      .def_readwrite("seed", &SimConfig::seed)
      .def_readwrite("degree", &SimConfig::degree)
      .def_readwrite("domain", &SimConfig::domain)
      .def_readwrite("box", &SimConfig::box)
      .def_readwrite("tau_s", &SimConfig::tau_s)
      .def_readwrite("eta", &SimConfig::eta)
      .def_readwrite("log2_ring", &SimConfig::log2_ring)
      .def_readwrite("log2_scale", &SimConfig::log2_scale)
      .def_readwrite("depth", &SimConfig::depth)
      .def_readwrite("mock_noise", &SimConfig::mock_noise)
      .def_readwrite("steps", &SimConfig::steps)
      .def_readwrite("x0", &SimConfig::x0)
      .def_readwrite("mode", &SimConfig::mode)
      .def_readwrite("workers", &SimConfig::workers)
      .def("validate", &SimConfig::validate);

  m.def("parse_config", &parse_config, py::arg("text"));
  m.def("load_config", &load_config, py::arg("path"));
  m.def("config_echo", &config_echo, py::arg("cfg"));

  py::class_<StepLog>(m, "StepLog")
      .def_readonly("t", &StepLog::t)
      .def_readonly("x", &StepLog::x)
      .def_readonly("u", &StepLog::u)
      .def_readonly("client_ms", &StepLog::client_ms)
      .def_readonly("cloud_ms", &StepLog::cloud_ms)
      .def_readonly("total_ms", &StepLog::total_ms)
      .def_readonly("ess", &StepLog::ess)
      .def_readonly("max_score", &StepLog::max_score)
      .def_readonly("margin", &StepLog::margin)
      .def_readonly("fallback", &StepLog::fallback);

  py::class_<TrajectoryLog>(m, "TrajectoryLog")
      .def_readonly("mode", &TrajectoryLog::mode)
      .def_readonly("steps", &TrajectoryLog::steps)
      .def_readonly("x_final", &TrajectoryLog::x_final)
      .def_readonly("online_mean_ms", &TrajectoryLog::online_mean_ms)
      .def_readonly("online_std_ms", &TrajectoryLog::online_std_ms)
      .def_readonly("violations", &TrajectoryLog::violations)
      .def_readonly("fallbacks", &TrajectoryLog::fallbacks);

  m.def("closed_loop_run", &closed_loop_run, py::arg("cfg"),
        py::call_guard<py::gil_scoped_release>());
  m.def("compare_modes", &compare_modes, py::arg("cfg"), py::arg("modes"),
        py::call_guard<py::gil_scoped_release>());
  m.def("max_state_dev", &max_state_dev, py::arg("a"), py::arg("b"), py::arg("coord"));
  m.def("max_input_dev", &max_input_dev, py::arg("a"), py::arg("b"));
}
