// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vempc/mpc.hpp"

namespace vempc {

struct QpResult {
  Vec U;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

// Operator-splitting (ADMM) solver for
//   min 1/2 U' H U + (S' x0)' U   s.t.  G U <= h(x0),
// the independent oracle the sampling estimators are compared against.
// Throws NumericalError on the iteration cap or on divergence.
QpResult reference_qp_solve(const CondensedQp& qp, const LinearConstraints& lc,
                            const Vec& x0, double tol = 1e-8,
                            int max_iter = 100000);

}  // namespace vempc
