// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "vempc/he_backend.hpp"
#include "vempc/surrogate.hpp"

namespace vempc {

// Primitive per-op slot-error bounds plus the derived protocol bounds.
struct ErrorBudget {
  double b_enc = 0.0;
  double b_mult = 0.0;
  double b_rot = 0.0;

  double b_tensor = 0.0;  // B(x,y) for the configured operand magnitudes
  double b_poly = 0.0;
  double b_u = 0.0;
  double b_s = 0.0;
  double l_h = 0.0;  // Lipschitz bound of the surrogate on the inflated interval
};

struct BudgetDims {
  int horizon = 0;  // N
  int inputs = 0;   // m
  int rows = 0;     // p
  double mag_u = 1.0;
  double mag_xi = 1.0;
};

// (x + y) B_enc + B_enc^2 + B_mult.
double tensor_bound(double x, double y, const ErrorBudget& b);

// Fills the derived fields from the primitive fields using the fixed
// formulas; the poly bound uses the surrogate's domain magnitude, and the
// Lipschitz constant is taken on the domain inflated by B_u.
ErrorBudget compute_budget(ErrorBudget primitives, const BudgetDims& dims,
                           const Surrogate& surrogate);

// Measured primitive bounds over random trials. `use_median` selects the
// median rather than the max; `safety` scales the aggregate.
ErrorBudget calibrate_primitives(const HeBackend& backend, int trials, uint64_t seed,
                                 bool use_median, double safety);

}  // namespace vempc
