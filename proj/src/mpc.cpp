// SPDX-License-Identifier: Apache-2.0
#include "vempc/mpc.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "vempc/rng.hpp"

namespace vempc {

namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw ConfigError(what);
}

bool symmetric(const Mat& M, double tol = 1e-9) {
  return (M - M.transpose()).cwiseAbs().maxCoeff() <= tol * (1.0 + M.cwiseAbs().maxCoeff());
}

double min_eigenvalue(const Mat& M) {
  Eigen::SelfAdjointEigenSolver<Mat> es(M);
  return es.eigenvalues().minCoeff();
}

}  // namespace

void PlantModel::validate() const {
  require(A.rows() >= 1 && A.rows() == A.cols(), "plant.A must be square with n >= 1");
  require(B.rows() == A.rows() && B.cols() >= 1, "plant.B row count must equal the state dimension");
}

void MpcProblem::validate(const PlantModel& model) const {
  const int n = model.n();
  const int m = model.m();
  require(N >= 1, "problem.N must be >= 1");
  require(Q.rows() == n && Q.cols() == n, "problem.Q must be n x n");
  require(Qf.rows() == n && Qf.cols() == n, "problem.Qf must be n x n");
  require(R.rows() == m && R.cols() == m, "problem.R must be m x m");
  require(symmetric(Q) && min_eigenvalue(Q) >= -1e-10, "problem.Q must be symmetric PSD");
  require(symmetric(Qf) && min_eigenvalue(Qf) >= -1e-10, "problem.Qf must be symmetric PSD");
  require(symmetric(R) && min_eigenvalue(R) > 0.0, "problem.R must be symmetric PD");
}

std::pair<Mat, Mat> build_prediction(const PlantModel& model, int N) {
  model.validate();
  require(N >= 1, "horizon must be >= 1");
  const int n = model.n();
  const int m = model.m();

  Mat Lambda = Mat::Zero(N * n, n);
  Mat Psi = Mat::Zero(N * n, N * m);
  Mat Ak = Mat::Identity(n, n);
  for (int k = 1; k <= N; ++k) {
    Ak = model.A * Ak;  // A^k
    Lambda.block((k - 1) * n, 0, n, n) = Ak;
  }
  // Psi block (k, j) = A^(k-1-j) B for j < k.
  std::vector<Mat> powers(N);
  powers[0] = Mat::Identity(n, n);
  for (int i = 1; i < N; ++i) powers[i] = model.A * powers[i - 1];
  for (int k = 1; k <= N; ++k)
    for (int j = 0; j < k; ++j)
      Psi.block((k - 1) * n, j * m, n, m) = powers[k - 1 - j] * model.B;
  return {Lambda, Psi};
}

CondensedQp condense_cost(const PlantModel& model, const MpcProblem& problem) {
  problem.validate(model);
  const int n = model.n();
  const int m = model.m();
  const int N = problem.N;

  auto [Lambda, Psi] = build_prediction(model, N);

  Mat Qbar = Mat::Zero(N * n, N * n);
  for (int k = 0; k < N - 1; ++k) Qbar.block(k * n, k * n, n, n) = problem.Q;
  Qbar.block((N - 1) * n, (N - 1) * n, n, n) = problem.Qf;
  Mat Rbar = Mat::Zero(N * m, N * m);
  for (int k = 0; k < N; ++k) Rbar.block(k * m, k * m, m, m) = problem.R;

  CondensedQp qp;
  qp.Lambda = Lambda;
  qp.Psi = Psi;
  qp.H = 2.0 * (Psi.transpose() * Qbar * Psi + Rbar);
  qp.H = 0.5 * (qp.H + qp.H.transpose()).eval();
  qp.S = 2.0 * Lambda.transpose() * Qbar * Psi;
  qp.P = problem.Q + Lambda.transpose() * Qbar * Lambda;
  return qp;
}

LinearConstraints build_constraints(const ConstraintSpec& spec,
                                    const PlantModel& model, int N,
                                    const Mat& Lambda, const Mat& Psi) {
  const int n = model.n();
  const int m = model.m();

  if (spec.G_raw) {
    require(spec.h_raw && spec.E_raw, "constraints: raw triple requires G, h, and E together");
    LinearConstraints lc{*spec.G_raw, *spec.h_raw, *spec.E_raw};
    require(lc.G.cols() == N * m, "constraints.G column count must equal N*m");
    require(lc.h_const.size() == lc.G.rows() && lc.E.rows() == lc.G.rows() && lc.E.cols() == n,
            "constraints: h/E dimensions must match G");
    return lc;
  }

  require(int(spec.state_bounds.size()) == n || spec.state_bounds.empty(),
          "constraints.state_bounds must have one entry per state");
  require(int(spec.input_bounds.size()) == m || spec.input_bounds.empty(),
          "constraints.input_bounds must have one entry per input");

  int p = 0;
  for (const auto& b : spec.state_bounds)
    if (b) p += 2 * N;
  for (const auto& b : spec.input_bounds)
    if (b) p += 2 * N;
  require(p > 0, "constraints: no bounds given and no raw triple present");

  LinearConstraints lc;
  lc.G = Mat::Zero(p, N * m);
  lc.h_const = Vec::Zero(p);
  lc.E = Mat::Zero(p, n);

  int row = 0;
  for (int k = 1; k <= N; ++k) {
    for (int i = 0; i < n; ++i) {
      if (!spec.state_bounds.empty() && spec.state_bounds[i]) {
        const double beta = *spec.state_bounds[i];
        require(std::isfinite(beta) && beta > 0, "constraints.state_bounds entries must be finite and positive");
        const auto psi_row = Psi.row((k - 1) * n + i);
        const auto lam_row = Lambda.row((k - 1) * n + i);
        lc.G.row(row) = psi_row;
        lc.h_const(row) = beta;
        lc.E.row(row) = -lam_row;
        ++row;
        lc.G.row(row) = -psi_row;
        lc.h_const(row) = beta;
        lc.E.row(row) = lam_row;
        ++row;
      }
    }
  }
  for (int k = 0; k < N; ++k) {
    for (int i = 0; i < m; ++i) {
      if (!spec.input_bounds.empty() && spec.input_bounds[i]) {
        const double gamma = *spec.input_bounds[i];
        require(std::isfinite(gamma) && gamma > 0, "constraints.input_bounds entries must be finite and positive");
        lc.G(row, k * m + i) = 1.0;
        lc.h_const(row) = gamma;
        ++row;
        lc.G(row, k * m + i) = -1.0;
        lc.h_const(row) = gamma;
        ++row;
      }
    }
  }
  return lc;
}

TiltedGaussian tilt(const CondensedQp& qp, const LinearConstraints& lc,
                    const Mat& Sigma0, double lambda) {
  const int d = int(qp.H.rows());
  require(lambda > 0, "sampling.lambda must be > 0");
  require(Sigma0.rows() == d && Sigma0.cols() == d, "sampling.Sigma0 must match the stacked input dimension");

  Eigen::LLT<Mat> llt0(Sigma0);
  if (llt0.info() != Eigen::Success) throw NumericalError("Sigma0 is not positive definite");
  const Mat Sigma0_inv = llt0.solve(Mat::Identity(d, d));

  Mat M = Sigma0_inv + qp.H / lambda;
  M = 0.5 * (M + M.transpose()).eval();
  Eigen::LLT<Mat> lltM(M);
  if (lltM.info() != Eigen::Success) throw NumericalError("tilt precision matrix is not positive definite");
  Mat SigmaU = lltM.solve(Mat::Identity(d, d));
  SigmaU = 0.5 * (SigmaU + SigmaU.transpose()).eval();

  Eigen::LLT<Mat> lltS(SigmaU);
  if (lltS.info() != Eigen::Success) {
    // One bounded jitter retry, then give up.
    const double jitter = 1e-12 * SigmaU.trace() / double(d);
    SigmaU += jitter * Mat::Identity(d, d);
    lltS.compute(SigmaU);
    if (lltS.info() != Eigen::Success)
      throw NumericalError("tilted covariance Cholesky failed after jitter retry");
  }

  TiltedGaussian tg;
  tg.Sigma0 = Sigma0;
  tg.SigmaU = SigmaU;
  tg.L = lltS.matrixL();
  tg.Gamma = lc.G * tg.L;
  tg.mean_gain = -(1.0 / lambda) * SigmaU * qp.S.transpose();
  tg.offset_gain = lc.G * tg.mean_gain - lc.E;
  tg.h_const = lc.h_const;
  tg.lambda = lambda;
  return tg;
}

SampleBatch sample_tilted(const TiltedGaussian& tg, const Vec& x0, int K,
                          uint64_t seed) {
  require(K >= 1, "sampling.K must be >= 1");
  const int d = int(tg.L.rows());
  const int p = int(tg.Gamma.rows());

  SampleBatch batch;
  batch.seed = seed;
  batch.xi = Mat(K, d);
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < d; ++j)
      batch.xi(i, j) = gaussian_at(seed, RngDomain::kXi, uint64_t(i), uint64_t(j));

  const Vec m = tg.mean(x0);
  const Vec b = tg.offset(x0);
  batch.U = (batch.xi * tg.L.transpose()).rowwise() + m.transpose();
  batch.g = Mat(K, p);
  if (p > 0) batch.g = (batch.xi * tg.Gamma.transpose()).rowwise() + b.transpose();
  return batch;
}

double violation_score(const Vec& g) {
  return g.cwiseMax(0.0).sum();
}

Vec estimate(const Mat& U, const Vec& weights) {
  require(U.rows() == weights.size(), "estimate: one weight per sample required");
  const double total = weights.sum();
  if (!(total > 0.0)) throw NumericalError("no informative samples");
  return (U.transpose() * weights) / total;
}

double rollout_cost(const PlantModel& model, const MpcProblem& problem,
                    const Vec& x0, const Vec& U) {
  const int m = model.m();
  Vec x = x0;
  double cost = 0.0;
  for (int k = 0; k < problem.N; ++k) {
    const Vec u = U.segment(k * m, m);
    cost += x.dot(problem.Q * x) + u.dot(problem.R * u);
    x = model.A * x + model.B * u;
  }
  cost += x.dot(problem.Qf * x);
  return cost;
}

}  // namespace vempc
