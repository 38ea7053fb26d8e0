// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "vempc/he_backend.hpp"
#include "vempc/rng.hpp"
#include "vempc/surrogate.hpp"

namespace vempc::testing {

inline SlotVector random_slots(int slots, uint64_t stream, double scale = 1.0) {
  SlotVector v(static_cast<size_t>(slots));
  for (int i = 0; i < slots; ++i)
    v[size_t(i)] = scale * uniform_signed(2718, RngDomain::kTest, stream, uint32_t(i));
  return v;
}

inline double max_abs_diff(const SlotVector& a, const SlotVector& b) {
  double worst = 0.0;
  for (size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

// Contract suite shared by every backend; budgets come from the caller.
inline void run_backend_contract(HeBackend& be, double tol_enc, double tol_mult,
                                 double tol_rot) {
  const int slots = be.slots();

  // Round trip, including the zero vector and a basis vector.
  {
    const SlotVector zero(size_t(slots), 0.0);
    CHECK(max_abs_diff(be.decrypt(be.encrypt(zero)), zero) <= tol_enc);
    const SlotVector v = random_slots(slots, 1);
    CHECK(max_abs_diff(be.decrypt(be.encrypt(v)), v) <= tol_enc);
    SlotVector basis(size_t(slots), 0.0);
    basis[size_t(slots / 3)] = 1.0;
    CHECK(max_abs_diff(be.decrypt(be.encrypt(basis)), basis) <= tol_enc);
  }

  // Addition is exact relative to the sum of decryptions.
  {
    const SlotVector va = random_slots(slots, 2);
    const SlotVector vb = random_slots(slots, 3);
    const auto ca = be.encrypt(va);
    const auto cb = be.encrypt(vb);
    const SlotVector da = be.decrypt(ca);
    const SlotVector db = be.decrypt(cb);
    const SlotVector dsum = be.decrypt(be.add_ct(ca, cb));
    double worst = 0.0;
    for (int i = 0; i < slots; ++i)
      worst = std::max(worst, std::abs(dsum[size_t(i)] - (da[size_t(i)] + db[size_t(i)])));
    CHECK(worst <= 1e-9);

    // Additive identity.
    const SlotVector zero(size_t(slots), 0.0);
    const SlotVector dz = be.decrypt(be.add_ct(ca, be.encrypt(zero)));
    double worst_id = 0.0;
    for (int i = 0; i < slots; ++i)
      worst_id = std::max(worst_id, std::abs(dz[size_t(i)] - da[size_t(i)]));
    CHECK(worst_id <= tol_enc + 1e-9);

    // Associativity at the decode level.
    const SlotVector vc = random_slots(slots, 4);
    const auto cc = be.encrypt(vc);
    const SlotVector lhs = be.decrypt(be.add_ct(be.add_ct(ca, cb), cc));
    const SlotVector rhs = be.decrypt(be.add_ct(ca, be.add_ct(cb, cc)));
    CHECK(max_abs_diff(lhs, rhs) <= 1e-9);
  }

  // Multiplication against the plaintext Hadamard oracle.
  {
    const SlotVector va = random_slots(slots, 5);
    const SlotVector vb = random_slots(slots, 6);
    const SlotVector prod_ct = be.decrypt(be.mul_ct(be.encrypt(va), be.encrypt(vb)));
    SlotVector expect(static_cast<size_t>(slots));
    for (int i = 0; i < slots; ++i) expect[size_t(i)] = va[size_t(i)] * vb[size_t(i)];
    CHECK(max_abs_diff(prod_ct, expect) <= tol_mult);

    const SlotVector ones(size_t(slots), 1.0);
    const SlotVector ident = be.decrypt(be.mul_pt(be.encrypt(va), ones));
    CHECK(max_abs_diff(ident, va) <= tol_mult);
  }

  // Rotation is the cyclic upward shift.
  {
    SlotVector v(size_t(slots), 0.0);
    for (int i = 0; i < std::min(4, slots); ++i) v[size_t(i)] = double(i + 1);
    const auto c = be.encrypt(v);
    const SlotVector r1 = be.decrypt(be.rotate(c, 1));
    SlotVector expect(size_t(slots), 0.0);
    for (int i = 0; i < slots; ++i) expect[size_t(i)] = v[size_t((i + 1) % slots)];
    CHECK(max_abs_diff(r1, expect) <= tol_rot);

    const SlotVector full = be.decrypt(be.rotate(c, slots));
    CHECK(max_abs_diff(full, be.decrypt(c)) <= tol_rot);
  }

  // Polynomial evaluation against the plaintext Horner oracle.
  {
    const Surrogate sur = chebyshev_fit(3, 1.0);
    const SlotVector v = random_slots(slots, 7);
    const SlotVector got = be.decrypt(be.eval_poly(be.encrypt(v), sur.coeffs));
    SlotVector expect(static_cast<size_t>(slots));
    for (int i = 0; i < slots; ++i) expect[size_t(i)] = sur.eval(v[size_t(i)]);
    CHECK(max_abs_diff(got, expect) <= tol_enc + 8.0 * tol_mult + 1e-9);

    // Identity polynomial and degree-0 shortcut.
    const SlotVector ident = be.decrypt(be.eval_poly(be.encrypt(v), {0.0, 1.0}));
    CHECK(max_abs_diff(ident, v) <= tol_enc + 2.0 * tol_mult + 1e-9);
    const SlotVector constant = be.decrypt(be.eval_poly(be.encrypt(v), {0.75}));
    CHECK(max_abs_diff(constant, SlotVector(size_t(slots), 0.75)) <= tol_enc + 2.0 * tol_mult + 1e-9);
  }

  // Segment sum-reduction reads exact sums at segment starts.
  {
    const int stride = std::min(8, slots);
    SlotVector v(size_t(slots), 0.0);
    for (int seg = 0; seg * stride < slots && seg < 3; ++seg)
      for (int j = 0; j < stride - 1; ++j)  // last slot left zero: padding
        v[size_t(seg * stride + j)] = double(seg + 1);
    const SlotVector red = be.decrypt(be.sum_reduce_segments(be.encrypt(v), stride));
    const double budget = double(stride) * (tol_enc + tol_rot) + 1e-9;
    for (int seg = 0; seg < 3 && seg * stride < slots; ++seg)
      CHECK(std::abs(red[size_t(seg * stride)] - double((seg + 1) * (stride - 1))) <= budget);
  }

  // Depth accounting: exactly `levels` multiplications are possible.
  {
    const SlotVector v(size_t(slots), 0.5);
    auto c = be.encrypt(v);
    const SlotVector half(size_t(slots), 0.5);
    for (int i = 0; i < be.levels(); ++i) c = be.mul_pt(c, half);
    CHECK_THROWS_AS((void)be.mul_pt(c, half), NumericalError);
  }
}

}  // namespace vempc::testing
