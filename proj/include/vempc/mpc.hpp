// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "vempc/common.hpp"

namespace vempc {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Discrete LTI plant x(t+1) = A x(t) + B u(t). dt is metadata only.
struct PlantModel {
  Mat A;
  Mat B;
  double dt = 0.0;

  int n() const { return int(A.rows()); }
  int m() const { return int(B.cols()); }
  void validate() const;
};

// Symmetric box bounds per coordinate (nullopt = unbounded), applied to
// predicted states k = 1..N and inputs k = 0..N-1; or a raw affine triple
// (G_raw, h_raw, E_raw) with rows G U <= h_raw + E_raw x0.
struct ConstraintSpec {
  std::vector<std::optional<double>> state_bounds;
  std::vector<std::optional<double>> input_bounds;
  std::optional<Mat> G_raw;
  std::optional<Vec> h_raw;
  std::optional<Mat> E_raw;
};

struct MpcProblem {
  int N = 0;
  Mat Q;
  Mat Qf;
  Mat R;
  ConstraintSpec constraints;

  void validate(const PlantModel& model) const;
};

struct CondensedQp {
  Mat Lambda;  // Nn x n, block k-1 = A^k
  Mat Psi;     // Nn x Nm
  Mat H;       // Nm x Nm, 2(Psi' Qbar Psi + Rbar)
  Mat S;       // n x Nm,  2 Lambda' Qbar Psi
  Mat P;       // n x n,   Q + Lambda' Qbar Lambda (unused online)
};

// Feasible set {U : G U <= h(x0)} with h(x0) = h_const + E x0.
struct LinearConstraints {
  Mat G;
  Vec h_const;
  Mat E;

  int p() const { return int(G.rows()); }
  Vec h(const Vec& x0) const { return h_const + E * x0; }
  Vec residual(const Vec& U, const Vec& x0) const { return G * U - h(x0); }
};

// Closed-form tilted sampler: U ~ N(m_U(x0), Sigma_U) with
// m_U(x0) = -(1/lambda) Sigma_U S' x0. Residuals of a sample U = m + L xi
// are g = b(x0) + Gamma xi with Gamma = G L and b(x0) = G m_U(x0) - h(x0).
struct TiltedGaussian {
  Mat Sigma0;
  Mat SigmaU;
  Mat L;            // lower Cholesky factor of SigmaU
  Mat Gamma;        // G * L
  Mat mean_gain;    // m_U(x0) = mean_gain * x0
  Mat offset_gain;  // b(x0) = offset_gain * x0 - h_const
  Vec h_const;
  double lambda = 0.0;

  Vec mean(const Vec& x0) const { return mean_gain * x0; }
  Vec offset(const Vec& x0) const { return offset_gain * x0 - h_const; }
};

// Sampled trajectories; row i of each matrix belongs to sample i.
// U - m_U(x0) = L xi holds exactly by construction.
struct SampleBatch {
  uint64_t seed = 0;
  Mat xi;       // K x Nm
  Mat U;        // K x Nm
  Mat g;        // K x p residuals
  Vec scores;   // filled by the caller's scoring pass
  Vec weights;  // filled by the caller's weighting pass
};

std::pair<Mat, Mat> build_prediction(const PlantModel& model, int N);

CondensedQp condense_cost(const PlantModel& model, const MpcProblem& problem);

LinearConstraints build_constraints(const ConstraintSpec& spec,
                                    const PlantModel& model, int N,
                                    const Mat& Lambda, const Mat& Psi);

TiltedGaussian tilt(const CondensedQp& qp, const LinearConstraints& lc,
                    const Mat& Sigma0, double lambda);

SampleBatch sample_tilted(const TiltedGaussian& tg, const Vec& x0, int K,
                          uint64_t seed);

// s = sum_j max(g_j, 0); zero iff feasible.
double violation_score(const Vec& g);

// Normalized weighted mean; throws NumericalError("no informative samples")
// when all weights vanish so callers can fall back to m_U(x0).
Vec estimate(const Mat& U, const Vec& weights);

// Rollout cost sum_{k<N} (x_k' Q x_k + u_k' R u_k) + x_N' Qf x_N by direct
// simulation; the oracle the condensed form is tested against.
double rollout_cost(const PlantModel& model, const MpcProblem& problem,
                    const Vec& x0, const Vec& U);

}  // namespace vempc
