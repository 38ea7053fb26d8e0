// SPDX-License-Identifier: Apache-2.0
#include "vempc/ckks/params.hpp"

#include <cmath>
#include <algorithm>
#include <cstring>
#include <set>

#include "vempc/ckks/rns.hpp"
#include "vempc/common.hpp"

namespace vempc::ckks {

uint64_t CkksParams::params_hash() const {
  uint64_t h = fnv1a64_u64(uint64_t(logn));
  h = fnv1a64_u64(uint64_t(depth), h);
  uint64_t bits;
  static_assert(sizeof(bits) == sizeof(scale));
  std::memcpy(&bits, &scale, sizeof(bits));
  h = fnv1a64_u64(bits, h);
  for (uint64_t q : moduli) h = fnv1a64_u64(q, h);
  return h;
}

void CkksParams::validate() const {
  if (logn < 3 || logn > 17) throw ConfigError("params.logn must be in [3, 17]");
  if (depth < 1 || depth > 12) throw ConfigError("params.depth must be in [1, 12]");
  if (!(scale > 1.0) || !std::isfinite(scale))
    throw ConfigError("params.scale must be a finite value > 1");
  if (int(moduli.size()) != depth + 3)
    throw ConfigError("params.moduli must hold base, depth+1 scaling primes, special");
  const uint64_t two_n = uint64_t(n()) << 1;
  std::set<uint64_t> seen;
  for (uint64_t q : moduli) {
    if (!is_prime(q)) throw ConfigError("params.moduli entries must be prime");
    if (q % two_n != 1) throw ConfigError("params.moduli entries must be 1 mod 2N");
    if (!seen.insert(q).second) throw ConfigError("params.moduli entries must be distinct");
  }
  for (int i = 1; i <= depth + 1; ++i)
    if (double(moduli[size_t(i)]) < scale * 0.5 || double(moduli[size_t(i)]) > scale * 2.0)
      throw ConfigError("params.moduli scaling primes must lie within 2x of scale");
  if (special() < moduli[0])
    throw ConfigError("params.moduli special prime must be at least the base prime");
}

CkksParams CkksParams::make(int logn, int depth, int log2_scale) {
  if (log2_scale < 20 || log2_scale > 50)
    throw ConfigError("params.scale must be between 2^20 and 2^50");
  CkksParams p;
  p.logn = logn;
  p.depth = depth;
  p.scale = std::ldexp(1.0, log2_scale);
  const uint64_t two_n = uint64_t(2) << logn;
  const int base_bits = log2_scale + 15;
  p.moduli.push_back(find_ntt_prime(base_bits, two_n, p.moduli));
  for (int i = 0; i < depth + 1; ++i)
    p.moduli.push_back(find_ntt_prime(log2_scale, two_n, p.moduli));
  p.moduli.push_back(find_ntt_prime(base_bits, two_n, p.moduli));
  // Key switching divides by the special prime, so it must dominate the base.
  if (p.moduli.back() < p.moduli.front()) std::swap(p.moduli.back(), p.moduli.front());
  p.validate();
  return p;
}

RnsContext::RnsContext(CkksParams params) : params_(std::move(params)) {
  params_.validate();
  tables_.reserve(params_.moduli.size());
  for (uint64_t q : params_.moduli) tables_.emplace_back(params_.logn, q);

  const int digits = params_.max_level() + 1;  // q-limbs at fresh level
  const int all = int(params_.moduli.size());
  delta_.assign(size_t(digits), std::vector<uint64_t>(size_t(all), 0));
  for (int j = 0; j < digits; ++j) {
    const uint64_t qj = params_.moduli[size_t(j)];
    uint64_t prod_mod_qj = 1;
    for (int i = 0; i < digits; ++i)
      if (i != j) prod_mod_qj = mulmod(prod_mod_qj, params_.moduli[size_t(i)] % qj, qj);
    const uint64_t tj = invmod(prod_mod_qj, qj);
    for (int m = 0; m < all; ++m) {
      const uint64_t qm = params_.moduli[size_t(m)];
      uint64_t prod = 1;
      for (int i = 0; i < digits; ++i)
        if (i != j) prod = mulmod(prod, params_.moduli[size_t(i)] % qm, qm);
      delta_[size_t(j)][size_t(m)] = mulmod(prod, tj % qm, qm);
    }
  }

  const uint64_t sp = params_.special();
  p_mod_.resize(static_cast<size_t>(digits));
  p_inv_mod_.resize(static_cast<size_t>(digits));
  for (int i = 0; i < digits; ++i) {
    const uint64_t qi = params_.moduli[size_t(i)];
    p_mod_[size_t(i)] = sp % qi;
    p_inv_mod_[size_t(i)] = invmod(sp % qi, qi);
  }

  q_inv_.assign(size_t(digits), std::vector<uint64_t>(size_t(digits), 0));
  for (int k = 0; k < digits; ++k)
    for (int i = 0; i < digits; ++i)
      if (i != k) {
        const uint64_t qi = params_.moduli[size_t(i)];
        q_inv_[size_t(k)][size_t(i)] = invmod(params_.moduli[size_t(k)] % qi, qi);
      }
}

RnsPoly RnsContext::lift_signed(const std::vector<int64_t>& coeffs, int limb_count) const {
  const int n = params_.n();
  if (int(coeffs.size()) != n) throw ConfigError("rns: coefficient-count mismatch");
  RnsPoly out;
  out.limb.resize(static_cast<size_t>(limb_count));
  for (int m = 0; m < limb_count; ++m) {
    const uint64_t q = params_.moduli[size_t(m)];
    auto& row = out.limb[size_t(m)];
    row.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      const int64_t c = coeffs[size_t(i)];
      row[size_t(i)] = c >= 0 ? uint64_t(c) % q : q - (uint64_t(-c) % q);
      if (row[size_t(i)] == q) row[size_t(i)] = 0;
    }
    tables_[size_t(m)].forward(row.data());
  }
  return out;
}

std::vector<int64_t> RnsContext::center_lift_limb0(const RnsPoly& x) const {
  const int n = params_.n();
  std::vector<uint64_t> tmp = x.limb.at(0);
  tables_[0].inverse(tmp.data());
  const uint64_t q0 = params_.moduli[0];
  std::vector<int64_t> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    out[size_t(i)] = tmp[size_t(i)] > q0 / 2 ? int64_t(tmp[size_t(i)]) - int64_t(q0)
                                             : int64_t(tmp[size_t(i)]);
  return out;
}

}  // namespace vempc::ckks
