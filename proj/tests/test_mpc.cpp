// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "vempc/mpc.hpp"
#include "vempc/rng.hpp"
#include "vempc/surrogate.hpp"

using namespace vempc;
using namespace vempc::testing;

namespace {

PlantModel random_model(uint64_t seed, int n, int m) {
  PlantModel model;
  model.A = Mat(n, n);
  model.B = Mat(n, m);
  uint64_t idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      model.A(i, j) = 0.6 * gaussian_at(seed, RngDomain::kTest, 1, idx++);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      model.B(i, j) = gaussian_at(seed, RngDomain::kTest, 2, idx++);
  return model;
}

Mat random_spd(uint64_t seed, uint64_t stream, int d, double shift) {
  Mat M(d, d);
  uint64_t idx = 0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) M(i, j) = gaussian_at(seed, RngDomain::kTest, stream, idx++);
  return M * M.transpose() + shift * Mat::Identity(d, d);
}

Vec random_vec(uint64_t seed, uint64_t stream, int d) {
  Vec v(d);
  for (int i = 0; i < d; ++i) v(i) = gaussian_at(seed, RngDomain::kTest, stream, uint64_t(i));
  return v;
}

double log_gaussian_pdf(const Vec& x, const Vec& mean, const Mat& cov) {
  const Eigen::LLT<Mat> llt(cov);
  const Vec d = x - mean;
  const Vec w = llt.matrixL().solve(d);
  double logdet = 0.0;
  for (int i = 0; i < cov.rows(); ++i) logdet += std::log(llt.matrixL()(i, i));
  return -0.5 * w.squaredNorm() - logdet - 0.5 * cov.rows() * std::log(2.0 * M_PI);
}

}  // namespace

TEST_CASE("build_prediction single-step identity") {
  PlantModel model{Mat{{1.0}}, Mat{{1.0}}, 1.0};
  auto [Lambda, Psi] = build_prediction(model, 1);
  CHECK(Lambda(0, 0) == doctest::Approx(1.0));
  CHECK(Psi(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("build_prediction two-step hand rollout") {
  PlantModel model{Mat{{1.0}}, Mat{{1.0}}, 1.0};
  auto [Lambda, Psi] = build_prediction(model, 2);
  CHECK(Lambda(0, 0) == doctest::Approx(1.0));
  CHECK(Lambda(1, 0) == doctest::Approx(1.0));
  CHECK(Psi(0, 0) == doctest::Approx(1.0));
  CHECK(Psi(0, 1) == doctest::Approx(0.0));
  CHECK(Psi(1, 0) == doctest::Approx(1.0));
  CHECK(Psi(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("prediction matches step-by-step simulation") {
  const PlantModel model = pendulum_model();
  const int N = 10;
  auto [Lambda, Psi] = build_prediction(model, N);
  const Vec x0 = Vec{{0.3, 0.1}};
  const Vec U = random_vec(77, 3, N);
  const Vec stacked = Lambda * x0 + Psi * U;
  Vec x = x0;
  for (int k = 0; k < N; ++k) {
    x = model.A * x + model.B * U.segment(k, 1);
    CHECK((stacked.segment(2 * k, 2) - x).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("build_prediction rejects malformed systems") {
  PlantModel bad{Mat::Zero(2, 3), Mat::Zero(2, 1), 1.0};
  CHECK_THROWS_AS(build_prediction(bad, 2), ConfigError);
}

TEST_CASE("condense_cost scalar example") {
  PlantModel model{Mat{{1.0}}, Mat{{1.0}}, 1.0};
  MpcProblem problem;
  problem.N = 1;
  problem.Q = Mat{{0.0}};
  problem.Qf = Mat{{1.0}};
  problem.R = Mat{{1.0}};
  const CondensedQp qp = condense_cost(model, problem);
  CHECK(qp.H(0, 0) == doctest::Approx(4.0));
  CHECK(qp.S(0, 0) == doctest::Approx(2.0));
  CHECK(qp.P(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("condense_cost rejects R that is not PD") {
  PlantModel model{Mat{{1.0}}, Mat{{1.0}}, 1.0};
  MpcProblem problem;
  problem.N = 1;
  problem.Q = Mat{{0.0}};
  problem.Qf = Mat{{0.0}};
  problem.R = Mat{{0.0}};
  CHECK_THROWS_AS(condense_cost(model, problem), ConfigError);
}

TEST_CASE("condensation consistency on random systems") {
  for (uint64_t trial = 0; trial < 25; ++trial) {
    const int n = 1 + int(uniform_below(5, RngDomain::kTest, 100 + trial, 0, 4));
    const int m = 1 + int(uniform_below(5, RngDomain::kTest, 100 + trial, 1, 2));
    const int N = 1 + int(uniform_below(5, RngDomain::kTest, 100 + trial, 2, 8));
    const PlantModel model = random_model(200 + trial, n, m);
    MpcProblem problem;
    problem.N = N;
    problem.Q = random_spd(300 + trial, 0, n, 0.1);
    problem.Qf = random_spd(300 + trial, 1, n, 0.1);
    problem.R = random_spd(300 + trial, 2, m, 0.5);
    const CondensedQp qp = condense_cost(model, problem);

    const Vec x0 = random_vec(400 + trial, 0, n);
    const Vec U = random_vec(400 + trial, 1, N * m);
    const double direct = rollout_cost(model, problem, x0, U);
    const double condensed =
        0.5 * U.dot(qp.H * U) + x0.dot(qp.S * U) + x0.dot(qp.P * x0);
    CHECK(std::abs(direct - condensed) <= 1e-10 * std::max(1.0, std::abs(direct)));
  }
}

TEST_CASE("H dominates the input-cost block") {
  const PlantModel model = pendulum_model();
  const MpcProblem problem = pendulum_problem();
  const CondensedQp qp = condense_cost(model, problem);
  Mat Rbar = Mat::Zero(10, 10);
  for (int k = 0; k < 10; ++k) Rbar(k, k) = problem.R(0, 0);
  Eigen::SelfAdjointEigenSolver<Mat> es(qp.H - 2.0 * Rbar);
  CHECK(es.eigenvalues().minCoeff() > -1e-10);
}

TEST_CASE("build_constraints input-only box") {
  PlantModel model{Mat{{1.0}}, Mat{{1.0}}, 1.0};
  ConstraintSpec spec;
  spec.input_bounds = {1.0};
  auto [Lambda, Psi] = build_prediction(model, 1);
  const LinearConstraints lc = build_constraints(spec, model, 1, Lambda, Psi);
  REQUIRE(lc.p() == 2);
  CHECK(lc.G(0, 0) == doctest::Approx(1.0));
  CHECK(lc.G(1, 0) == doctest::Approx(-1.0));
  CHECK(lc.h_const(0) == doctest::Approx(1.0));
  CHECK(lc.h_const(1) == doctest::Approx(1.0));
  CHECK(lc.E.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("pendulum constraint row count") {
  const PlantModel model = pendulum_model();
  const MpcProblem problem = pendulum_problem();
  auto [Lambda, Psi] = build_prediction(model, problem.N);
  const LinearConstraints lc =
      build_constraints(problem.constraints, model, problem.N, Lambda, Psi);
  CHECK(lc.p() == 60);
}

TEST_CASE("feasible rollouts have nonpositive residuals") {
  const PlantModel model = pendulum_model();
  const MpcProblem problem = pendulum_problem();
  auto [Lambda, Psi] = build_prediction(model, problem.N);
  const LinearConstraints lc =
      build_constraints(problem.constraints, model, problem.N, Lambda, Psi);

  // Zero input from the origin keeps every bound satisfied.
  const Vec x0 = Vec::Zero(2);
  const Vec U = Vec::Zero(10);
  const Vec g = lc.residual(U, x0);
  CHECK(g.maxCoeff() <= 0.0);

  // A strict violation is flagged: drive hard positive from rest.
  Vec Uhot = Vec::Constant(10, 1.5);
  CHECK(lc.residual(Uhot, x0).maxCoeff() > 0.0);
}

TEST_CASE("tilt scalar closed form") {
  CondensedQp qp;
  qp.H = Mat{{4.0}};
  qp.S = Mat{{2.0}};
  qp.P = Mat{{1.0}};
  LinearConstraints lc;
  lc.G = Mat{{1.0}};
  lc.h_const = Vec{{1.0}};
  lc.E = Mat::Zero(1, 1);
  const Mat Sigma0 = Mat{{0.0625}};
  const TiltedGaussian tg = tilt(qp, lc, Sigma0, 0.1);
  CHECK(tg.SigmaU(0, 0) == doctest::Approx(1.0 / 56.0).epsilon(1e-10));
  const Vec x0 = Vec{{1.0}};
  CHECK(tg.mean(x0)(0) == doctest::Approx(-20.0 / 56.0).epsilon(1e-10));
}

TEST_CASE("tilt approaches the unconstrained optimum as lambda -> 0") {
  const PlantModel model = pendulum_model();
  const MpcProblem problem = pendulum_problem();
  const CondensedQp qp = condense_cost(model, problem);
  auto [Lambda, Psi] = build_prediction(model, problem.N);
  const LinearConstraints lc =
      build_constraints(problem.constraints, model, problem.N, Lambda, Psi);

  const TiltedGaussian tg = tilt(qp, lc, pendulum_sigma0(), 1e-6);
  const Vec x0 = Vec{{0.3, 0.1}};
  const Vec exact = -qp.H.ldlt().solve(qp.S.transpose() * x0);
  const double rel = (tg.mean(x0) - exact).norm() / exact.norm();
  CHECK(rel <= 1e-4);
}

TEST_CASE("tilt invariants on the pendulum") {
  const PlantModel model = pendulum_model();
  const MpcProblem problem = pendulum_problem();
  const CondensedQp qp = condense_cost(model, problem);
  auto [Lambda, Psi] = build_prediction(model, problem.N);
  const LinearConstraints lc =
      build_constraints(problem.constraints, model, problem.N, Lambda, Psi);
  const Mat Sigma0 = pendulum_sigma0();
  const TiltedGaussian tg = tilt(qp, lc, Sigma0, kPendulumLambda);

  const Mat recon = tg.L * tg.L.transpose();
  CHECK((recon - tg.SigmaU).cwiseAbs().maxCoeff() <=
        1e-10 * tg.SigmaU.cwiseAbs().maxCoeff());

  const Mat precision = Sigma0.inverse() + qp.H / kPendulumLambda;
  const Mat eye = tg.SigmaU * precision;
  CHECK((eye - Mat::Identity(10, 10)).cwiseAbs().maxCoeff() <= 1e-8);

  Eigen::SelfAdjointEigenSolver<Mat> es(tg.SigmaU);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
  CHECK(es.eigenvalues().maxCoeff() <= 0.0625 + 1e-12);
}

TEST_CASE("tilted density identity") {
  for (uint64_t trial = 0; trial < 10; ++trial) {
    const int d = 1 + int(uniform_below(17, RngDomain::kTest, trial, 0, 3));
    const int n = 2;
    const Mat H = random_spd(500 + trial, 0, d, 0.5);
    const Mat Sigma0 = random_spd(500 + trial, 1, d, 0.5);
    Mat S = Mat(n, d);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j)
        S(i, j) = gaussian_at(500 + trial, RngDomain::kTest, 2, uint64_t(i * d + j));
    const double lambda = 0.05 + u32_to_unit(rng_block(600 + trial, RngDomain::kTest, 0, 0)[0]);

    CondensedQp qp;
    qp.H = H;
    qp.S = S;
    qp.P = Mat::Identity(n, n);
    LinearConstraints lc;
    lc.G = Mat::Identity(1, d).eval();
    lc.h_const = Vec::Ones(1);
    lc.E = Mat::Zero(1, n);
    const TiltedGaussian tg = tilt(qp, lc, Sigma0, lambda);

    const Vec x0 = random_vec(700 + trial, 0, n);
    const Vec U1 = random_vec(700 + trial, 1, d);
    const Vec U2 = random_vec(700 + trial, 2, d);
    auto tilted_log = [&](const Vec& U) {
      const double J = 0.5 * U.dot(H * U) + x0.dot(S * U);
      return log_gaussian_pdf(U, Vec::Zero(d), Sigma0) - J / lambda;
    };
    const Vec m = tg.mean(x0);
    const double d1 = tilted_log(U1) - log_gaussian_pdf(U1, m, tg.SigmaU);
    const double d2 = tilted_log(U2) - log_gaussian_pdf(U2, m, tg.SigmaU);
    CHECK(std::abs(d1 - d2) <= 1e-8);
  }
}

TEST_CASE("sample_tilted affine identity and determinism") {
  const PlantModel model = pendulum_model();
  const MpcProblem problem = pendulum_problem();
  const CondensedQp qp = condense_cost(model, problem);
  auto [Lambda, Psi] = build_prediction(model, problem.N);
  const LinearConstraints lc =
      build_constraints(problem.constraints, model, problem.N, Lambda, Psi);
  const TiltedGaussian tg = tilt(qp, lc, pendulum_sigma0(), kPendulumLambda);

  const Vec x0 = Vec{{0.3, 0.1}};
  const SampleBatch batch = sample_tilted(tg, x0, 32, 99);
  const SampleBatch again = sample_tilted(tg, x0, 32, 99);
  CHECK((batch.xi - again.xi).cwiseAbs().maxCoeff() == 0.0);
  CHECK((batch.U - again.U).cwiseAbs().maxCoeff() == 0.0);

  const Vec h = lc.h(x0);
  for (int i = 0; i < 32; ++i) {
    const Vec direct = lc.G * batch.U.row(i).transpose() - h;
    CHECK((direct - batch.g.row(i).transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  }

  // Batches drawn with fewer samples are prefixes: sample i never depends on K.
  const SampleBatch small = sample_tilted(tg, x0, 8, 99);
  CHECK((small.xi - batch.xi.topRows(8)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("violation_score examples") {
  CHECK(violation_score(Vec{{-1.0, -2.0}}) == doctest::Approx(0.0));
  CHECK(violation_score(Vec{{0.5, -1.0, 0.25}}) == doctest::Approx(0.75));
  const Vec g = random_vec(888, 0, 50);
  double manual = 0.0;
  for (int i = 0; i < 50; ++i) manual += std::max(g(i), 0.0);
  CHECK(violation_score(g) == doctest::Approx(manual).epsilon(1e-14));
}

TEST_CASE("estimate uniform, survivor, scale invariance, and failure") {
  Mat U(3, 2);
  U << 1.0, 2.0, 3.0, 4.0, 5.0, 6.0;

  const Vec uniform = estimate(U, Vec::Ones(3));
  CHECK(uniform(0) == doctest::Approx(3.0));
  CHECK(uniform(1) == doctest::Approx(4.0));

  const Vec survivor = estimate(U, Vec{{1.0, 0.0, 0.0}});
  CHECK(survivor(0) == doctest::Approx(1.0));
  CHECK(survivor(1) == doctest::Approx(2.0));

  const Vec w = Vec{{0.2, 0.5, 0.3}};
  const Vec a = estimate(U, w);
  const Vec b = estimate(U, (17.5 * w).eval());
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);

  CHECK_THROWS_AS(estimate(U, Vec::Zero(3)), NumericalError);
}

TEST_CASE("estimate recovers the closed-form mean in the interior") {
  // No constraint within reach: weights are all one, so the estimator is a
  // plain Monte Carlo mean around m_U(x0).
  const PlantModel model = pendulum_model();
  const MpcProblem problem = pendulum_problem();
  const CondensedQp qp = condense_cost(model, problem);
  auto [Lambda, Psi] = build_prediction(model, problem.N);
  const LinearConstraints lc =
      build_constraints(problem.constraints, model, problem.N, Lambda, Psi);
  const TiltedGaussian tg = tilt(qp, lc, pendulum_sigma0(), kPendulumLambda);

  const Vec x0 = Vec::Zero(2);
  const int K = 20000;
  const SampleBatch batch = sample_tilted(tg, x0, K, 2024);
  const Vec est = estimate(batch.U, Vec::Ones(K));
  const Vec m = tg.mean(x0);
  for (int j = 0; j < 10; ++j) {
    const double se = std::sqrt(tg.SigmaU(j, j) / K);
    CHECK(std::abs(est(j) - m(j)) <= 3.0 * se + 1e-12);
  }
}

TEST_CASE("weights below one half imply true violation beyond the slack") {
  const PlantModel model = pendulum_model();
  const MpcProblem problem = pendulum_problem();
  const CondensedQp qp = condense_cost(model, problem);
  auto [Lambda, Psi] = build_prediction(model, problem.N);
  const LinearConstraints lc =
      build_constraints(problem.constraints, model, problem.N, Lambda, Psi);
  const TiltedGaussian tg = tilt(qp, lc, pendulum_sigma0(), kPendulumLambda);

  const Surrogate sur = chebyshev_fit(3, 3.757067);
  const double p_delta = lc.p() * sur.delta;
  const WeightRule rule{p_delta, 1e3};

  const SampleBatch batch = sample_tilted(tg, Vec{{0.3, 0.1}}, 512, 5);
  for (int i = 0; i < 512; ++i) {
    const Vec g = batch.g.row(i).transpose();
    const auto [s_bar, r_bar] = threshold_weight(rule, surrogate_score(sur, g));
    (void)s_bar;
    if (r_bar < 0.5) CHECK(violation_score(g) > rule.tau_s - p_delta);
  }
}
