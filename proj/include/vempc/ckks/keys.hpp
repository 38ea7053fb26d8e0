// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "vempc/ckks/rns.hpp"
#include "vempc/rng.hpp"

namespace vempc::ckks {

struct SecretKey {
  RnsPoly s;  // over every modulus including the special prime
};

struct PublicKey {
  RnsPoly b, a;  // over the q-chain at fresh level
};

// Hybrid key-switch key with one digit per q-limb; each digit pair spans the
// full q-chain plus the special prime (special limb last).
struct KeySwitchKey {
  std::vector<std::pair<RnsPoly, RnsPoly>> digit;  // (b_j, a_j)
};

struct EvalKeys {
  PublicKey pk;
  KeySwitchKey relin;
  std::map<uint32_t, KeySwitchKey> rot;  // by Galois element
  uint64_t seed = 0;
};

SecretKey make_secret_key(const RnsContext& ctx, uint64_t seed);
EvalKeys make_eval_keys(const RnsContext& ctx, const SecretKey& sk, uint64_t seed,
                        const std::vector<int>& rotation_shifts);

uint32_t galois_element(const CkksParams& params, int rho);

// Deterministic samplers shared with encryption.
std::vector<int64_t> sample_ternary(int n, uint64_t seed, RngDomain domain,
                                    uint64_t stream);
std::vector<int64_t> sample_gaussian_rounded(int n, uint64_t seed, RngDomain domain,
                                             uint64_t stream, double sigma = 3.2);
RnsPoly sample_uniform_poly(const RnsContext& ctx, uint64_t seed, uint64_t stream_base,
                            int limb_count);
uint64_t key_stream(uint32_t role, uint64_t x = 0, uint64_t y = 0);

}  // namespace vempc::ckks
