// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "vempc/ckks/engine.hpp"
#include "vempc/ckks/keys.hpp"

namespace vempc::ckks {

// Blob layout, little endian:
//   magic "VEMP" | version u16 | kind u8 | log2N u8 | level u8 | limbs u8 |
//   reserved u16 | scale f64 bits | body
// Body is N u64 coefficients per limb per component. Rotation-key sets carry
// a u32 key count, and each entry is prefixed by its u32 Galois element.
enum class BlobKind : uint8_t {
  kPlaintext = 0,
  kCiphertext = 1,
  kPublicKey = 2,
  kRelinKey = 3,
  kRotationKeys = 4,
  kSecretKey = 5,
};

constexpr uint16_t kBlobVersion = 1;

std::vector<uint8_t> serialize_plaintext(const CkksParams& p, const RnsPoly& poly,
                                         int level, double scale);
RnsPoly parse_plaintext(const CkksParams& p, const std::vector<uint8_t>& blob,
                        int* level, double* scale);

std::vector<uint8_t> serialize_ciphertext(const CkksParams& p, const CkksCiphertext& ct);
CkksCiphertext parse_ciphertext(const CkksParams& p, const std::vector<uint8_t>& blob);

std::vector<uint8_t> serialize_public_key(const CkksParams& p, const PublicKey& pk);
PublicKey parse_public_key(const CkksParams& p, const std::vector<uint8_t>& blob);

std::vector<uint8_t> serialize_relin_key(const CkksParams& p, const KeySwitchKey& key);
KeySwitchKey parse_relin_key(const CkksParams& p, const std::vector<uint8_t>& blob);

std::vector<uint8_t> serialize_rotation_keys(const CkksParams& p,
                                             const std::map<uint32_t, KeySwitchKey>& keys);
std::map<uint32_t, KeySwitchKey> parse_rotation_keys(const CkksParams& p,
                                                     const std::vector<uint8_t>& blob);

std::vector<uint8_t> serialize_secret_key(const CkksParams& p, const SecretKey& sk);
SecretKey parse_secret_key(const CkksParams& p, const std::vector<uint8_t>& blob);

}  // namespace vempc::ckks
