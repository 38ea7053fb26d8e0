// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>
#include <vector>

#include "vempc/mpc.hpp"

namespace vempc {

// Degree-ell polynomial surrogate of [gamma]_+ on [-B, B] in monomial form,
// with the certified uniform error delta measured on a dense grid.
struct Surrogate {
  int ell = 0;
  double B = 1.0;
  std::vector<double> coeffs;  // c_0..c_ell
  double delta = 0.0;

  double eval(double gamma) const {
    double acc = coeffs.back();
    for (int k = int(coeffs.size()) - 2; k >= 0; --k) acc = acc * gamma + coeffs[size_t(k)];
    return acc;
  }
};

struct WeightRule {
  double tau_s = 0.0;
  double eta = 1e3;
};

// Chebyshev-node interpolation of [gamma]_+ with the error band recentered,
// then rescaled from [-1, 1] to [-B, B] via c_k -> B^(1-k) c_k.
Surrogate chebyshev_fit(int ell, double B);

// s_ell = sum_j h_ell(g_j).
double surrogate_score(const Surrogate& sur, const Vec& g);

// Returns (s_bar, r_bar) with s_bar = max(s_ell - tau_s, 0),
// r_bar = exp(-eta * s_bar).
std::pair<double, double> threshold_weight(const WeightRule& rule, double s_ell);

// Domain bound heuristic: max_j (|b_j| + z * ||Gamma_j||_2) over the corner
// states of a box |x0_i| <= box_i.
double auto_domain_bound(const TiltedGaussian& tg, const Vec& operating_box,
                         double z = 4.0);

}  // namespace vempc
