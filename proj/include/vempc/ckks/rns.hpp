// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "vempc/ckks/ntt.hpp"
#include "vempc/ckks/params.hpp"

namespace vempc::ckks {

// Ring element in RNS form, one row per modulus, always NTT domain unless a
// routine states otherwise.
struct RnsPoly {
  std::vector<std::vector<uint64_t>> limb;

  int limbs() const { return int(limb.size()); }
  int n() const { return limb.empty() ? 0 : int(limb[0].size()); }
};

// Shared immutable precomputation for one parameter set: NTT tables per
// modulus and the key-switch and rescale constants.
class RnsContext {
 public:
  explicit RnsContext(CkksParams params);

  const CkksParams& params() const { return params_; }
  const NttTables& table(int modulus_idx) const { return tables_[size_t(modulus_idx)]; }
  int special_idx() const { return int(params_.moduli.size()) - 1; }

  // Small signed coefficients -> NTT-domain poly over moduli[0..limb_count).
  RnsPoly lift_signed(const std::vector<int64_t>& coeffs, int limb_count) const;
  // Centered coefficients from limb 0 alone; valid while |value| < q0/2.
  std::vector<int64_t> center_lift_limb0(const RnsPoly& x) const;

  // [Delta_j]_m for digit j and modulus index m, with
  // Delta_j = (Q/q_j) * [(Q/q_j)^{-1}]_{q_j} over the full q-chain.
  uint64_t delta_factor(int j, int m) const { return delta_[size_t(j)][size_t(m)]; }
  uint64_t p_mod(int i) const { return p_mod_[size_t(i)]; }          // [P]_{q_i}
  uint64_t p_inv_mod(int i) const { return p_inv_mod_[size_t(i)]; }  // [P^{-1}]_{q_i}
  uint64_t q_inv_mod(int k, int i) const {  // [q_k^{-1}]_{q_i}
    return q_inv_[size_t(k)][size_t(i)];
  }

 private:
  CkksParams params_;
  std::vector<NttTables> tables_;
  std::vector<std::vector<uint64_t>> delta_;
  std::vector<uint64_t> p_mod_, p_inv_mod_;
  std::vector<std::vector<uint64_t>> q_inv_;
};

}  // namespace vempc::ckks
