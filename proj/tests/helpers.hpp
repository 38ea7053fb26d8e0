// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

#include "vempc/mpc.hpp"

namespace vempc::testing {

// Linearized inverted-pendulum benchmark used across the suite.
inline PlantModel pendulum_model() {
  PlantModel model;
  model.A = Mat{{1.0246, 0.0504}, {0.9890, 1.0246}};
  model.B = Mat{{0.0251}, {1.0082}};
  model.dt = 0.05;
  return model;
}

inline MpcProblem pendulum_problem() {
  MpcProblem problem;
  problem.N = 10;
  problem.Q = Mat{{50.0, 0.0}, {0.0, 5.0}};
  problem.Qf = 2.0 * problem.Q;
  problem.R = Mat{{0.1}};
  problem.constraints.state_bounds = {0.5, 0.8};
  problem.constraints.input_bounds = {1.0};
  return problem;
}

inline Mat pendulum_sigma0() { return 0.25 * 0.25 * Mat::Identity(10, 10); }
constexpr double kPendulumLambda = 0.1;

// Standard error of a weighted mean component via the normalized-ratio
// delta method.
inline double weighted_mean_se(const Vec& values, const Vec& weights) {
  const double wsum = weights.sum();
  const double mean = values.dot(weights) / wsum;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double d = weights(i) * (values(i) - mean);
    acc += d * d;
  }
  return std::sqrt(acc) / wsum;
}

}  // namespace vempc::testing
