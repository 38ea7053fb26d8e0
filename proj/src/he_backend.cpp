// SPDX-License-Identifier: Apache-2.0
#include "vempc/he_backend.hpp"

namespace vempc {

HeEvaluator::Ct HeEvaluator::eval_poly(const Ct& a,
                                       const std::vector<double>& coeffs) const {
  if (coeffs.empty()) throw ConfigError("eval_poly: empty coefficient list");
  const int ell = int(coeffs.size()) - 1;
  if (ell == 0) {
    // Degree-0 shortcut: constant times an all-ones surrogate of a's shape.
    Ct zero = mul_pt(a, broadcast(0.0));
    return add_pt(zero, broadcast(coeffs[0]));
  }
  if (level_of(a) < ell) throw NumericalError("eval_poly: level underflow");

  Ct acc = mul_pt(a, broadcast(coeffs[size_t(ell)]));
  acc = add_pt(acc, broadcast(coeffs[size_t(ell - 1)]));
  for (int k = ell - 2; k >= 0; --k) {
    acc = mul_ct(acc, a);
    acc = add_pt(acc, broadcast(coeffs[size_t(k)]));
  }
  return acc;
}

HeEvaluator::Ct HeEvaluator::sum_reduce_segments(const Ct& a, int stride) const {
  if (stride < 1 || (stride & (stride - 1)) != 0 || stride > slots())
    throw ConfigError("sum_reduce_segments: stride must be a power of two within the slot count");
  Ct acc = a;
  for (int len = stride / 2; len >= 1; len /= 2)
    acc = add_ct(acc, rotate(acc, len));
  return acc;
}

}  // namespace vempc
