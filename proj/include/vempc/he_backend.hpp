// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "vempc/common.hpp"

namespace vempc {

// Real-valued slot payload (the complex slots carry real protocol data).
using SlotVector = std::vector<double>;

// Per-primitive additive slot-noise magnitudes. The mock backend injects
// uniform noise of these sizes; for CKKS they are calibration targets.
struct NoiseModel {
  double e_enc = 0.0;
  double e_mult = 0.0;
  double e_rot = 0.0;
};

// Evaluation-only contract: everything the cloud is allowed to do. There is
// deliberately no decrypt on this interface; secret-key material lives only
// behind HeBackend, which the cloud never receives.
class HeEvaluator {
 public:
  // Backend-owned ciphertext payload behind a shared immutable handle.
  struct Ct {
    std::shared_ptr<const void> payload;
    bool valid() const { return payload != nullptr; }
  };

  virtual ~HeEvaluator() = default;

  virtual int slots() const = 0;
  virtual int levels() const = 0;               // fresh-ciphertext rescale budget
  virtual int level_of(const Ct& c) const = 0;  // remaining rescales of c

  virtual Ct add_ct(const Ct& a, const Ct& b) const = 0;
  virtual Ct add_pt(const Ct& a, const SlotVector& v) const = 0;
  virtual Ct mul_ct(const Ct& a, const Ct& b) const = 0;
  virtual Ct mul_pt(const Ct& a, const SlotVector& v) const = 0;
  virtual Ct rotate(const Ct& a, int rho) const = 0;  // cyclic upward shift

  virtual std::vector<uint8_t> serialize_ct(const Ct& c) const = 0;
  virtual Ct deserialize_ct(const std::vector<uint8_t>& blob) const = 0;
  virtual uint64_t params_hash() const = 0;

  // Horner with plaintext coefficients c_0..c_ell: one ct-pt multiplication
  // then ell-1 ct-ct multiplications, consuming depth ell.
  Ct eval_poly(const Ct& a, const std::vector<double>& coeffs) const;

  // log2(stride) rounds of rotate-and-add; afterwards slot k*stride holds the
  // sum of segment k. Non-start slots are unspecified.
  Ct sum_reduce_segments(const Ct& a, int stride) const;

 protected:
  SlotVector broadcast(double value) const { return SlotVector(size_t(slots()), value); }
};

// Full client-side contract: evaluation plus key-holding encrypt/decrypt.
class HeBackend : public HeEvaluator {
 public:
  virtual Ct encrypt(const SlotVector& v) const = 0;
  virtual SlotVector decrypt(const Ct& c) const = 0;

  // Fresh ciphertext that can be added to a once-multiplied ciphertext;
  // backends with scale bookkeeping pin the product scale here.
  virtual Ct encrypt_aligned(const SlotVector& v) const { return encrypt(v); }
};

}  // namespace vempc
