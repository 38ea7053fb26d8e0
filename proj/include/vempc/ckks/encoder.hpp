// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "vempc/he_backend.hpp"

namespace vempc::ckks {

// Canonical embedding for real slot vectors: slot j holds m(zeta^{5^j}) with
// zeta the primitive 2N-th complex root, so a Galois map X -> X^5 shifts
// slots up by one.
class CkksEncoder {
 public:
  explicit CkksEncoder(int logn);

  int slots() const { return slots_; }

  std::vector<int64_t> encode(const SlotVector& v, double scale) const;
  SlotVector decode(const std::vector<int64_t>& coeffs, double scale) const;

  // O(n^2) direct-sum references used as test oracles.
  std::vector<int64_t> encode_reference(const SlotVector& v, double scale) const;
  SlotVector decode_reference(const std::vector<int64_t>& coeffs, double scale) const;

 private:
  void fft_special(std::vector<std::complex<double>>& vals) const;
  void fft_special_inv(std::vector<std::complex<double>>& vals) const;

  int logn_, n_, slots_;
  std::vector<std::complex<double>> ksi_;  // ksi_[k] = exp(2 pi i k / 2n)
  std::vector<uint32_t> rot_group_;        // 5^j mod 2n
};

}  // namespace vempc::ckks
