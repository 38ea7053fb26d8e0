// SPDX-License-Identifier: Apache-2.0
#include "vempc/ckks/keys.hpp"

#include <cmath>

#include "vempc/common.hpp"

namespace vempc::ckks {

uint64_t key_stream(uint32_t role, uint64_t x, uint64_t y) {
  return fnv1a64_u64(y, fnv1a64_u64(x, fnv1a64_u64(uint64_t(role))));
}

namespace {
constexpr uint32_t kRoleSecret = 0;
constexpr uint32_t kRolePublic = 1;
constexpr uint32_t kRoleRelin = 2;
constexpr uint32_t kRoleRot = 3;
}  // namespace

std::vector<int64_t> sample_ternary(int n, uint64_t seed, RngDomain domain,
                                    uint64_t stream) {
  std::vector<int64_t> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    out[size_t(i)] = int64_t(uniform_below(seed, domain, stream, uint32_t(i), 3)) - 1;
  return out;
}

std::vector<int64_t> sample_gaussian_rounded(int n, uint64_t seed, RngDomain domain,
                                             uint64_t stream, double sigma) {
  std::vector<int64_t> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    out[size_t(i)] = llround(sigma * gaussian_at(seed, domain, stream, uint64_t(i)));
  return out;
}

namespace {

// One ring element, uniform per limb (CRT-equivalent to uniform mod the
// product), sampled directly in evaluation order.
RnsPoly sample_uniform(const RnsContext& ctx, uint64_t seed, uint64_t stream_base,
                       const std::vector<int>& limb_idx) {
  const int n = ctx.params().n();
  RnsPoly out;
  out.limb.resize(limb_idx.size());
  for (size_t m = 0; m < limb_idx.size(); ++m) {
    const uint64_t q = ctx.params().moduli[size_t(limb_idx[m])];
    auto& row = out.limb[m];
    row.resize(static_cast<size_t>(n));
    const uint64_t stream = fnv1a64_u64(uint64_t(limb_idx[m]), stream_base);
    for (int i = 0; i < n; ++i)
      row[size_t(i)] = uniform_below(seed, RngDomain::kUniformPoly, stream, uint32_t(i), q);
  }
  return out;
}

std::vector<int> iota_limbs(int count) {
  std::vector<int> v(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) v[size_t(i)] = i;
  return v;
}

}  // namespace

RnsPoly sample_uniform_poly(const RnsContext& ctx, uint64_t seed, uint64_t stream_base,
                            int limb_count) {
  return sample_uniform(ctx, seed, stream_base, iota_limbs(limb_count));
}

SecretKey make_secret_key(const RnsContext& ctx, uint64_t seed) {
  const auto coeffs =
      sample_ternary(ctx.params().n(), seed, RngDomain::kSecretKey, key_stream(kRoleSecret));
  SecretKey sk;
  sk.s = ctx.lift_signed(coeffs, int(ctx.params().moduli.size()));
  return sk;
}

namespace {

// b = -(a*s + e) + addend over the listed moduli (NTT domain throughout).
RnsPoly make_b(const RnsContext& ctx, const RnsPoly& a, const SecretKey& sk,
               const std::vector<int64_t>& e_coeffs, const std::vector<int>& limb_idx,
               const RnsPoly* addend) {
  const int n = ctx.params().n();
  RnsPoly b;
  b.limb.resize(limb_idx.size());
  for (size_t m = 0; m < limb_idx.size(); ++m) {
    const int li = limb_idx[m];
    const uint64_t q = ctx.params().moduli[size_t(li)];
    std::vector<uint64_t> e_row(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      const int64_t c = e_coeffs[size_t(i)];
      e_row[size_t(i)] = c >= 0 ? uint64_t(c) % q : q - (uint64_t(-c) % q);
      if (e_row[size_t(i)] == q) e_row[size_t(i)] = 0;
    }
    ctx.table(li).forward(e_row.data());
    auto& row = b.limb[m];
    row.resize(static_cast<size_t>(n));
    const auto& arow = a.limb[m];
    const auto& srow = sk.s.limb[size_t(li)];
    for (int i = 0; i < n; ++i) {
      uint64_t v = addmod(mulmod(arow[size_t(i)], srow[size_t(i)], q), e_row[size_t(i)], q);
      v = v == 0 ? 0 : q - v;
      if (addend) v = addmod(v, addend->limb[m][size_t(i)], q);
      row[size_t(i)] = v;
    }
  }
  return b;
}

KeySwitchKey make_keyswitch_key(const RnsContext& ctx, const SecretKey& sk,
                                const RnsPoly& target,  // over all moduli
                                uint64_t seed, uint32_t role, uint64_t tag) {
  const auto& p = ctx.params();
  const int digits = p.max_level() + 1;
  const int all = int(p.moduli.size());
  const auto limbs = iota_limbs(all);
  KeySwitchKey key;
  key.digit.resize(static_cast<size_t>(digits));
  for (int j = 0; j < digits; ++j) {
    RnsPoly a = sample_uniform(ctx, seed, key_stream(role, tag, uint64_t(j)), limbs);
    const auto e = sample_gaussian_rounded(p.n(), seed, RngDomain::kErrorPoly,
                                           key_stream(role, tag, uint64_t(j)));
    // addend = P * Delta_j * target, zero on the special limb.
    RnsPoly addend;
    addend.limb.resize(static_cast<size_t>(all));
    for (int m = 0; m < all; ++m) {
      const uint64_t q = p.moduli[size_t(m)];
      auto& row = addend.limb[size_t(m)];
      row.resize(size_t(p.n()));
      if (m == all - 1) continue;  // P * anything vanishes mod P
      const uint64_t f = mulmod(ctx.p_mod(m), ctx.delta_factor(j, m), q);
      const auto& trow = target.limb[size_t(m)];
      for (int i = 0; i < p.n(); ++i) row[size_t(i)] = mulmod(f, trow[size_t(i)], q);
    }
    RnsPoly b = make_b(ctx, a, sk, e, limbs, &addend);
    key.digit[size_t(j)] = {std::move(b), std::move(a)};
  }
  return key;
}

}  // namespace

uint32_t galois_element(const CkksParams& params, int rho) {
  const int slots = params.slots();
  const uint64_t m = uint64_t(params.n()) << 1;
  const int r = ((rho % slots) + slots) % slots;
  uint64_t g = 1;
  for (int i = 0; i < r; ++i) g = (g * 5) % m;
  return uint32_t(g);
}

EvalKeys make_eval_keys(const RnsContext& ctx, const SecretKey& sk, uint64_t seed,
                        const std::vector<int>& rotation_shifts) {
  const auto& p = ctx.params();
  EvalKeys keys;
  keys.seed = seed;

  const auto q_limbs = iota_limbs(p.q_limbs());
  keys.pk.a = sample_uniform(ctx, seed, key_stream(kRolePublic), q_limbs);
  const auto e = sample_gaussian_rounded(p.n(), seed, RngDomain::kErrorPoly,
                                         key_stream(kRolePublic));
  keys.pk.b = make_b(ctx, keys.pk.a, sk, e, q_limbs, nullptr);

  // s^2 over every modulus for the relinearization key.
  RnsPoly s2 = sk.s;
  for (int m = 0; m < int(p.moduli.size()); ++m) {
    const uint64_t q = p.moduli[size_t(m)];
    for (auto& v : s2.limb[size_t(m)]) v = mulmod(v, v, q);
  }
  keys.relin = make_keyswitch_key(ctx, sk, s2, seed, kRoleRelin, 0);

  for (int rho : rotation_shifts) {
    const uint32_t g = galois_element(p, rho);
    if (g == 1 || keys.rot.count(g)) continue;
    // s(X^g) per limb via the evaluation-order permutation.
    RnsPoly sg = sk.s;
    for (int m = 0; m < int(p.moduli.size()); ++m) {
      const auto perm = ctx.table(m).galois_perm(g);
      const auto& src = sk.s.limb[size_t(m)];
      auto& dst = sg.limb[size_t(m)];
      for (size_t i = 0; i < perm.size(); ++i) dst[i] = src[perm[i]];
    }
    keys.rot.emplace(g, make_keyswitch_key(ctx, sk, sg, seed, kRoleRot, uint64_t(g)));
  }
  return keys;
}

}  // namespace vempc::ckks
