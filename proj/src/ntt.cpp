// SPDX-License-Identifier: Apache-2.0
#include "vempc/ckks/ntt.hpp"

#include <unordered_map>

#include "vempc/common.hpp"

namespace vempc::ckks {

namespace {

uint32_t bit_reverse(uint32_t x, int bits) {
  uint32_t r = 0;
  for (int i = 0; i < bits; ++i) {
    r = (r << 1) | (x & 1);
    x >>= 1;
  }
  return r;
}

}  // namespace

NttTables::NttTables(int logn, uint64_t q) : logn_(logn), n_(1 << logn), q_(q) {
  const uint64_t two_n = uint64_t(n_) << 1;
  psi_ = primitive_root_2n(q, two_n);
  const uint64_t ipsi = invmod(psi_, q);
  ninv_ = invmod(uint64_t(n_), q);
  ninv_shoup_ = shoup_precompute(ninv_, q);

  psi_br_.resize(static_cast<size_t>(n_));
  psi_br_shoup_.resize(static_cast<size_t>(n_));
  ipsi_br_.resize(static_cast<size_t>(n_));
  ipsi_br_shoup_.resize(static_cast<size_t>(n_));
  std::vector<uint64_t> pow_psi(static_cast<size_t>(n_)), pow_ipsi(static_cast<size_t>(n_));
  pow_psi[0] = pow_ipsi[0] = 1;
  for (int i = 1; i < n_; ++i) {
    pow_psi[size_t(i)] = mulmod(pow_psi[size_t(i - 1)], psi_, q);
    pow_ipsi[size_t(i)] = mulmod(pow_ipsi[size_t(i - 1)], ipsi, q);
  }
  for (int i = 0; i < n_; ++i) {
    const uint32_t r = bit_reverse(uint32_t(i), logn_);
    psi_br_[size_t(i)] = pow_psi[r];
    ipsi_br_[size_t(i)] = pow_ipsi[r];
    psi_br_shoup_[size_t(i)] = shoup_precompute(psi_br_[size_t(i)], q);
    ipsi_br_shoup_[size_t(i)] = shoup_precompute(ipsi_br_[size_t(i)], q);
  }

  // Recover which psi exponent each evaluation slot holds by transforming X.
  std::unordered_map<uint64_t, uint32_t> exp_of_val;
  exp_of_val.reserve(size_t(n_) * 2);
  uint64_t val = psi_;
  const uint64_t psi_sq = mulmod(psi_, psi_, q);
  for (uint64_t e = 1; e < two_n; e += 2) {
    exp_of_val.emplace(val, uint32_t(e));
    val = mulmod(val, psi_sq, q);
  }
  std::vector<uint64_t> delta(size_t(n_), 0);
  delta[1] = 1;
  forward(delta.data());
  exp_of_idx_.assign(size_t(n_), 0);
  idx_of_exp_.assign(two_n, UINT32_MAX);
  for (int i = 0; i < n_; ++i) {
    const auto it = exp_of_val.find(delta[size_t(i)]);
    if (it == exp_of_val.end()) throw NumericalError("ntt: evaluation order recovery failed");
    exp_of_idx_[size_t(i)] = it->second;
    idx_of_exp_[it->second] = uint32_t(i);
  }
}

void NttTables::forward(uint64_t* a) const {
  int t = n_;
  for (int m = 1; m < n_; m <<= 1) {
    t >>= 1;
    for (int i = 0; i < m; ++i) {
      const uint64_t s = psi_br_[size_t(m + i)];
      const uint64_t ss = psi_br_shoup_[size_t(m + i)];
      const int j1 = 2 * i * t;
      for (int j = j1; j < j1 + t; ++j) {
        const uint64_t u = a[j];
        const uint64_t v = mulmod_shoup(a[j + t], s, ss, q_);
        a[j] = addmod(u, v, q_);
        a[j + t] = submod(u, v, q_);
      }
    }
  }
}

void NttTables::inverse(uint64_t* a) const {
  int t = 1;
  for (int m = n_; m > 1; m >>= 1) {
    const int h = m >> 1;
    int j1 = 0;
    for (int i = 0; i < h; ++i) {
      const uint64_t s = ipsi_br_[size_t(h + i)];
      const uint64_t ss = ipsi_br_shoup_[size_t(h + i)];
      for (int j = j1; j < j1 + t; ++j) {
        const uint64_t u = a[j];
        const uint64_t v = a[j + t];
        a[j] = addmod(u, v, q_);
        a[j + t] = mulmod_shoup(submod(u, v, q_), s, ss, q_);
      }
      j1 += 2 * t;
    }
    t <<= 1;
  }
  for (int j = 0; j < n_; ++j) a[j] = mulmod_shoup(a[j], ninv_, ninv_shoup_, q_);
}

std::vector<uint32_t> NttTables::galois_perm(uint32_t g) const {
  const uint64_t two_n = uint64_t(n_) << 1;
  if ((g & 1) == 0 || g >= two_n) throw ConfigError("ntt: galois element must be odd and < 2N");
  std::vector<uint32_t> perm(static_cast<size_t>(n_));
  for (int i = 0; i < n_; ++i) {
    const uint64_t e = (uint64_t(exp_of_idx_[size_t(i)]) * g) % two_n;
    const uint32_t src = idx_of_exp_[e];
    if (src == UINT32_MAX) throw NumericalError("ntt: galois permutation out of range");
    perm[size_t(i)] = src;
  }
  return perm;
}

std::vector<uint64_t> negacyclic_eval_reference(const NttTables& t,
                                                const std::vector<uint64_t>& coeffs) {
  const int n = t.n();
  const uint64_t q = t.q();
  std::vector<uint64_t> out(size_t(n), 0);
  for (int i = 0; i < n; ++i) {
    const uint64_t base = powmod(t.psi(), t.exponent_at(i), q);
    uint64_t pw = 1, acc = 0;
    for (int k = 0; k < n; ++k) {
      acc = addmod(acc, mulmod(coeffs[size_t(k)], pw, q), q);
      pw = mulmod(pw, base, q);
    }
    out[size_t(i)] = acc;
  }
  return out;
}

std::vector<uint64_t> negacyclic_mul_reference(const std::vector<uint64_t>& a,
                                               const std::vector<uint64_t>& b, uint64_t q) {
  const int n = int(a.size());
  std::vector<uint64_t> c(size_t(n), 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const uint64_t p = mulmod(a[size_t(i)], b[size_t(j)], q);
      const int k = i + j;
      if (k < n)
        c[size_t(k)] = addmod(c[size_t(k)], p, q);
      else
        c[size_t(k - n)] = submod(c[size_t(k - n)], p, q);
    }
  return c;
}

}  // namespace vempc::ckks
