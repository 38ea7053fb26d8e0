// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

namespace vempc::ckks {

// Modulus chain layout: moduli[0] is the base prime, moduli[1..depth+1] are
// scaling primes consumed by rescaling, moduli.back() is the special prime
// used only inside key switching and never held by a ciphertext.
struct CkksParams {
  int logn = 13;
  int depth = 3;  // highest supported polynomial degree
  double scale = 0x1p30;
  std::vector<uint64_t> moduli;

  int n() const { return 1 << logn; }
  int slots() const { return 1 << (logn - 1); }
  int max_level() const { return depth + 1; }
  int q_limbs() const { return depth + 2; }  // ciphertext limbs at fresh level
  uint64_t special() const { return moduli.back(); }

  uint64_t params_hash() const;
  void validate() const;

  static CkksParams make(int logn, int depth, int log2_scale = 30);
};

}  // namespace vempc::ckks
