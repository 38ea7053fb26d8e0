// SPDX-License-Identifier: Apache-2.0
#include "vempc/ckks/modmath.hpp"

#include <algorithm>

#include "vempc/common.hpp"

namespace vempc::ckks {

uint64_t powmod(uint64_t base, uint64_t exp, uint64_t q) {
  uint64_t acc = 1 % q;
  uint64_t b = base % q;
  while (exp) {
    if (exp & 1) acc = mulmod(acc, b, q);
    b = mulmod(b, b, q);
    exp >>= 1;
  }
  return acc;
}

uint64_t invmod(uint64_t a, uint64_t q) { return powmod(a, q - 2, q); }

namespace {

bool miller_rabin(uint64_t n, uint64_t a) {
  if (a % n == 0) return true;
  uint64_t d = n - 1;
  int r = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++r;
  }
  uint64_t x = powmod(a, d, n);
  if (x == 1 || x == n - 1) return true;
  for (int i = 1; i < r; ++i) {
    x = mulmod(x, x, n);
    if (x == n - 1) return true;
  }
  return false;
}

}  // namespace

bool is_prime(uint64_t n) {
  if (n < 2) return false;
  for (uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n == p) return true;
    if (n % p == 0) return false;
  }
  // Deterministic for all 64-bit inputs with this base set.
  for (uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull})
    if (!miller_rabin(n, a)) return false;
  return true;
}

uint64_t find_ntt_prime(int bits, uint64_t two_n, const std::vector<uint64_t>& avoid) {
  if (bits < 20 || bits > 60) throw ConfigError("params: prime size out of range");
  const uint64_t center = 1ull << bits;
  for (uint64_t k = 1;; ++k) {
    for (int sign = 0; sign < 2; ++sign) {
      const uint64_t q = sign == 0 ? center + k * two_n + 1
                                   : center - k * two_n + 1;
      if (q <= two_n || (q >> bits) > 1) {
        if (sign == 1 && q <= two_n) throw ConfigError("params: no NTT prime found");
        continue;
      }
      if (!is_prime(q)) continue;
      if (std::find(avoid.begin(), avoid.end(), q) != avoid.end()) continue;
      return q;
    }
    if (k * two_n > center / 2) throw ConfigError("params: no NTT prime found");
  }
}

uint64_t primitive_root_2n(uint64_t q, uint64_t two_n) {
  if ((q - 1) % two_n != 0) throw ConfigError("params: modulus not 1 mod 2N");
  const uint64_t cofactor = (q - 1) / two_n;
  for (uint64_t h = 2; h < q; ++h) {
    const uint64_t psi = powmod(h, cofactor, q);
    if (powmod(psi, two_n / 2, q) == q - 1) return psi;
  }
  throw NumericalError("params: no primitive root found");
}

}  // namespace vempc::ckks
