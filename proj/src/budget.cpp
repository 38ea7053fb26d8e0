// SPDX-License-Identifier: Apache-2.0
#include "vempc/budget.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "vempc/common.hpp"
#include "vempc/rng.hpp"

namespace vempc {

double tensor_bound(double x, double y, const ErrorBudget& b) {
  return (x + y) * b.b_enc + b.b_enc * b.b_enc + b.b_mult;
}

ErrorBudget compute_budget(ErrorBudget b, const BudgetDims& dims,
                           const Surrogate& surrogate) {
  if (b.b_enc < 0 || b.b_mult < 0 || b.b_rot < 0)
    throw ConfigError("budget: primitive bounds must be nonnegative");
  if (dims.horizon < 1 || dims.inputs < 1 || dims.rows < 1)
    throw ConfigError("budget: dims must be positive");

  const double nm = double(dims.horizon) * double(dims.inputs);
  b.b_tensor = tensor_bound(dims.mag_u, dims.mag_xi, b);
  b.b_u = b.b_enc + nm * (b.b_tensor + b.b_rot);

  const int ell = surrogate.ell;
  double coeff_sum = 0.0;
  for (double c : surrogate.coeffs) coeff_sum += std::abs(c);
  const double gmax = std::max(1.0, surrogate.B);
  b.b_poly = double(ell) * b.b_mult * std::pow(gmax, ell - 1) * coeff_sum;

  // max |h'| over the domain inflated by B_u.
  const double lo = -(surrogate.B + b.b_u), hi = surrogate.B + b.b_u;
  const int grid = 100000;
  double lh = 0.0;
  for (int i = 0; i <= grid; ++i) {
    const double g = lo + (hi - lo) * double(i) / double(grid);
    double d = 0.0, gp = 1.0;
    for (size_t k = 1; k < surrogate.coeffs.size(); ++k) {
      d += double(k) * surrogate.coeffs[k] * gp;
      gp *= g;
    }
    lh = std::max(lh, std::abs(d));
  }
  b.l_h = lh;

  b.b_s = double(dims.rows) * b.b_rot + b.b_poly + b.l_h * b.b_u;
  return b;
}

namespace {

double aggregate(std::vector<double>& xs, bool use_median) {
  if (xs.empty()) throw ConfigError("budget: no calibration trials");
  if (!use_median) return *std::max_element(xs.begin(), xs.end());
  std::sort(xs.begin(), xs.end());
  const size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace

ErrorBudget calibrate_primitives(const HeBackend& backend, int trials, uint64_t seed,
                                 bool use_median, double safety) {
  if (trials < 1) throw ConfigError("budget: trials must be positive");
  const int slots = backend.slots();
  std::vector<double> enc_errs, mul_errs, rot_errs;
  for (int t = 0; t < trials; ++t) {
    SlotVector v(static_cast<size_t>(slots)), w(static_cast<size_t>(slots));
    for (int i = 0; i < slots; ++i) {
      v[size_t(i)] = uniform_signed(seed, RngDomain::kTest, 2 * uint64_t(t), uint32_t(i));
      w[size_t(i)] =
          uniform_signed(seed, RngDomain::kTest, 2 * uint64_t(t) + 1, uint32_t(i));
    }
    const auto cv = backend.encrypt(v);
    const auto cw = backend.encrypt(w);

    const SlotVector dv = backend.decrypt(cv);
    double e_enc = 0.0;
    for (int i = 0; i < slots; ++i)
      e_enc = std::max(e_enc, std::abs(dv[size_t(i)] - v[size_t(i)]));
    enc_errs.push_back(e_enc);

    const SlotVector dm = backend.decrypt(backend.mul_ct(cv, cw));
    double e_mul = 0.0;
    for (int i = 0; i < slots; ++i)
      e_mul = std::max(e_mul, std::abs(dm[size_t(i)] - v[size_t(i)] * w[size_t(i)]));
    mul_errs.push_back(e_mul);

    const SlotVector dr = backend.decrypt(backend.rotate(cv, 1));
    double e_rot = 0.0;
    for (int i = 0; i < slots; ++i)
      e_rot = std::max(e_rot,
                       std::abs(dr[size_t(i)] - v[size_t((i + 1) % slots)]));
    rot_errs.push_back(e_rot);
  }
  ErrorBudget b;
  b.b_enc = safety * aggregate(enc_errs, use_median);
  b.b_mult = safety * aggregate(mul_errs, use_median);
  b.b_rot = safety * aggregate(rot_errs, use_median);
  return b;
}

}  // namespace vempc
