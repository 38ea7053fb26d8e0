// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

namespace vempc::ckks {

inline uint64_t addmod(uint64_t a, uint64_t b, uint64_t q) {
  const uint64_t s = a + b;
  return s >= q ? s - q : s;
}

inline uint64_t submod(uint64_t a, uint64_t b, uint64_t q) {
  return a >= b ? a - b : a + q - b;
}

inline uint64_t mulmod(uint64_t a, uint64_t b, uint64_t q) {
  return uint64_t((unsigned __int128)a * b % q);
}

// Shoup multiplication: b fixed, bshoup = floor(b * 2^64 / q).
inline uint64_t mulmod_shoup(uint64_t a, uint64_t b, uint64_t bshoup, uint64_t q) {
  const uint64_t hi = uint64_t(((unsigned __int128)a * bshoup) >> 64);
  const uint64_t r = a * b - hi * q;
  return r >= q ? r - q : r;
}

inline uint64_t shoup_precompute(uint64_t b, uint64_t q) {
  return uint64_t(((unsigned __int128)b << 64) / q);
}

uint64_t powmod(uint64_t base, uint64_t exp, uint64_t q);
uint64_t invmod(uint64_t a, uint64_t q);  // q prime
bool is_prime(uint64_t n);

// Smallest-|q - 2^bits| prime with q = 1 (mod 2n), skipping `avoid`.
// Candidates alternate above/below 2^bits so scaling primes straddle the
// nominal scale.
uint64_t find_ntt_prime(int bits, uint64_t two_n, const std::vector<uint64_t>& avoid);

// Primitive 2n-th root of unity mod q (q = 1 mod 2n).
uint64_t primitive_root_2n(uint64_t q, uint64_t two_n);

}  // namespace vempc::ckks
