// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>

namespace vempc {

// Counter-based generator (Philox4x32-10). Every output block is a pure
// function of (key, counter), so draw i of stream s under a given seed is
// reproducible regardless of batching, worker count, or call order.
struct Philox4x32 {
  static constexpr uint32_t kMul0 = 0xD2511F53u;
  static constexpr uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr uint32_t kWeyl1 = 0xBB67AE85u;

  static std::array<uint32_t, 4> block(std::array<uint32_t, 4> ctr,
                                       std::array<uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const uint64_t p0 = uint64_t(kMul0) * ctr[0];
      const uint64_t p1 = uint64_t(kMul1) * ctr[2];
      ctr = {uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], uint32_t(p1),
             uint32_t(p0 >> 32) ^ ctr[3] ^ key[1], uint32_t(p0)};
    }
    return ctr;
  }
};

// Disjoint counter domains so independent consumers of one seed never
// overlap streams.
enum class RngDomain : uint32_t {
  kXi = 1,           // protocol perturbations xi
  kSecretKey = 2,    // ternary secret
  kErrorPoly = 3,    // encryption error polynomials
  kUniformPoly = 4,  // uniform ring elements (pk/evk "a" parts)
  kEncryptRand = 5,  // per-encryption randomness
  kMockNoise = 6,    // mock backend noise
  kTest = 7,         // scratch draws in tests
};

inline std::array<uint32_t, 4> rng_block(uint64_t seed, RngDomain domain,
                                         uint64_t stream, uint32_t block_idx,
                                         uint32_t attempt = 0) {
  const std::array<uint32_t, 4> ctr = {uint32_t(stream),
                                       uint32_t(stream >> 32), block_idx,
                                       uint32_t(domain) | (attempt << 16)};
  const std::array<uint32_t, 2> key = {uint32_t(seed), uint32_t(seed >> 32)};
  return Philox4x32::block(ctr, key);
}

inline double u32_to_unit(uint32_t x) {
  return (double(x) + 0.5) * 0x1p-32;  // maps into (0, 1), never hits 0 or 1
}

inline std::pair<double, double> gaussian_pair(uint64_t seed, RngDomain domain,
                                               uint64_t stream,
                                               uint32_t block_idx) {
  const auto r = rng_block(seed, domain, stream, block_idx);
  const double u1 = u32_to_unit(r[0]);
  const double u2 = u32_to_unit(r[1]);
  const double mag = std::sqrt(-2.0 * std::log(u1));
  const double ang = 6.283185307179586476925286766559 * u2;
  return {mag * std::cos(ang), mag * std::sin(ang)};
}

// Standard-normal draw at (stream, idx); idx pairs share one Box-Muller block.
inline double gaussian_at(uint64_t seed, RngDomain domain, uint64_t stream,
                          uint64_t idx) {
  const auto z = gaussian_pair(seed, domain, stream, uint32_t(idx / 2));
  return (idx % 2 == 0) ? z.first : z.second;
}

inline uint64_t uniform_u64(uint64_t seed, RngDomain domain, uint64_t stream,
                            uint32_t idx, uint32_t attempt = 0) {
  const auto r = rng_block(seed, domain, stream, idx, attempt);
  return uint64_t(r[0]) | (uint64_t(r[1]) << 32);
}

// Unbiased draw in [0, bound) by rejection over the counter's attempt lane.
inline uint64_t uniform_below(uint64_t seed, RngDomain domain, uint64_t stream,
                              uint32_t idx, uint64_t bound) {
  const uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  for (uint32_t attempt = 0;; ++attempt) {
    const uint64_t v = uniform_u64(seed, domain, stream, idx, attempt);
    if (v < limit) return v % bound;
  }
}

// Uniform in [-1, 1].
inline double uniform_signed(uint64_t seed, RngDomain domain, uint64_t stream,
                             uint32_t idx) {
  const auto r = rng_block(seed, domain, stream, idx);
  return 2.0 * u32_to_unit(r[0]) - 1.0;
}

}  // namespace vempc
