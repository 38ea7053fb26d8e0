// SPDX-License-Identifier: Apache-2.0
#include "vempc/ckks/serial.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "vempc/common.hpp"

namespace vempc::ckks {

namespace {

void put_u16(std::vector<uint8_t>& b, uint16_t v) {
  b.push_back(uint8_t(v));
  b.push_back(uint8_t(v >> 8));
}
void put_u32(std::vector<uint8_t>& b, uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(uint8_t(v >> (8 * i)));
}
void put_u64(std::vector<uint8_t>& b, uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back(uint8_t(v >> (8 * i)));
}

struct Reader {
  const std::vector<uint8_t>& b;
  size_t pos = 0;

  void need(size_t n) const {
    if (pos + n > b.size()) throw ConfigError("blob: truncated");
  }
  uint8_t u8() {
    need(1);
    return b[pos++];
  }
  uint16_t u16() {
    need(2);
    uint16_t v = uint16_t(b[pos]) | uint16_t(b[pos + 1]) << 8;
    pos += 2;
    return v;
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t(b[pos + size_t(i)]) << (8 * i);
    pos += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(b[pos + size_t(i)]) << (8 * i);
    pos += 8;
    return v;
  }
  void done() const {
    if (pos != b.size()) throw ConfigError("blob: trailing bytes");
  }
};

void put_header(std::vector<uint8_t>& b, BlobKind kind, int logn, int level, int limbs,
                double scale) {
  b.push_back('V');
  b.push_back('E');
  b.push_back('M');
  b.push_back('P');
  put_u16(b, kBlobVersion);
  b.push_back(uint8_t(kind));
  b.push_back(uint8_t(logn));
  b.push_back(uint8_t(level));
  b.push_back(uint8_t(limbs));
  put_u16(b, 0);  // reserved
  put_u64(b, std::bit_cast<uint64_t>(scale));
}

struct Header {
  BlobKind kind;
  int logn, level, limbs;
  double scale;
};

Header read_header(Reader& r, const CkksParams& p, BlobKind expect) {
  r.need(4);
  if (std::memcmp(r.b.data(), "VEMP", 4) != 0) throw ConfigError("blob: bad magic");
  r.pos += 4;
  if (r.u16() != kBlobVersion) throw ConfigError("blob: unsupported version");
  Header h;
  h.kind = BlobKind(r.u8());
  if (h.kind != expect) throw ConfigError("blob: unexpected kind");
  h.logn = r.u8();
  if (h.logn != p.logn) throw ConfigError("blob: ring size mismatch");
  h.level = r.u8();
  h.limbs = r.u8();
  if (r.u16() != 0) throw ConfigError("blob: reserved field not zero");
  h.scale = std::bit_cast<double>(r.u64());
  return h;
}

void put_poly(std::vector<uint8_t>& b, const RnsPoly& poly) {
  for (const auto& row : poly.limb)
    for (uint64_t v : row) put_u64(b, v);
}

RnsPoly read_poly(Reader& r, const CkksParams& p, int limbs) {
  RnsPoly poly;
  poly.limb.resize(size_t(limbs));
  for (int m = 0; m < limbs; ++m) {
    auto& row = poly.limb[size_t(m)];
    row.resize(size_t(p.n()));
    for (int i = 0; i < p.n(); ++i) {
      row[size_t(i)] = r.u64();
      if (row[size_t(i)] >= p.moduli[size_t(m)])
        throw ConfigError("blob: coefficient exceeds modulus");
    }
  }
  return poly;
}

// Key-switch digits span every modulus; the special prime is the last row, so
// modulus index equals row index here.
RnsPoly read_key_poly(Reader& r, const CkksParams& p) {
  const int limbs = int(p.moduli.size());
  RnsPoly poly;
  poly.limb.resize(size_t(limbs));
  for (int m = 0; m < limbs; ++m) {
    auto& row = poly.limb[size_t(m)];
    row.resize(size_t(p.n()));
    for (int i = 0; i < p.n(); ++i) {
      row[size_t(i)] = r.u64();
      if (row[size_t(i)] >= p.moduli[size_t(m)])
        throw ConfigError("blob: coefficient exceeds modulus");
    }
  }
  return poly;
}

void check_level_limbs(const CkksParams& p, const Header& h, int max_level) {
  if (h.level < 0 || h.level > max_level) throw ConfigError("blob: level out of range");
  if (h.limbs != h.level + 1) throw ConfigError("blob: limb count inconsistent with level");
  if (!std::isfinite(h.scale) || !(h.scale > 0.0))
    throw ConfigError("blob: scale must be finite and positive");
  (void)p;
}

}  // namespace

std::vector<uint8_t> serialize_plaintext(const CkksParams& p, const RnsPoly& poly,
                                         int level, double scale) {
  std::vector<uint8_t> b;
  put_header(b, BlobKind::kPlaintext, p.logn, level, poly.limbs(), scale);
  put_poly(b, poly);
  return b;
}

RnsPoly parse_plaintext(const CkksParams& p, const std::vector<uint8_t>& blob, int* level,
                        double* scale) {
  Reader r{blob};
  const Header h = read_header(r, p, BlobKind::kPlaintext);
  check_level_limbs(p, h, p.max_level());
  RnsPoly poly = read_poly(r, p, h.limbs);
  r.done();
  if (level) *level = h.level;
  if (scale) *scale = h.scale;
  return poly;
}

std::vector<uint8_t> serialize_ciphertext(const CkksParams& p, const CkksCiphertext& ct) {
  std::vector<uint8_t> b;
  put_header(b, BlobKind::kCiphertext, p.logn, ct.level, ct.level + 1, ct.scale);
  put_poly(b, ct.c0);
  put_poly(b, ct.c1);
  return b;
}

CkksCiphertext parse_ciphertext(const CkksParams& p, const std::vector<uint8_t>& blob) {
  Reader r{blob};
  const Header h = read_header(r, p, BlobKind::kCiphertext);
  check_level_limbs(p, h, p.max_level());
  CkksCiphertext ct;
  ct.level = h.level;
  ct.scale = h.scale;
  ct.c0 = read_poly(r, p, h.limbs);
  ct.c1 = read_poly(r, p, h.limbs);
  r.done();
  return ct;
}

std::vector<uint8_t> serialize_public_key(const CkksParams& p, const PublicKey& pk) {
  std::vector<uint8_t> b;
  put_header(b, BlobKind::kPublicKey, p.logn, p.max_level(), p.q_limbs(), p.scale);
  put_poly(b, pk.b);
  put_poly(b, pk.a);
  return b;
}

PublicKey parse_public_key(const CkksParams& p, const std::vector<uint8_t>& blob) {
  Reader r{blob};
  const Header h = read_header(r, p, BlobKind::kPublicKey);
  if (h.level != p.max_level() || h.limbs != p.q_limbs())
    throw ConfigError("blob: public key shape mismatch");
  PublicKey pk;
  pk.b = read_poly(r, p, h.limbs);
  pk.a = read_poly(r, p, h.limbs);
  r.done();
  return pk;
}

namespace {

void put_keyswitch_body(std::vector<uint8_t>& b, const KeySwitchKey& key) {
  for (const auto& [kb, ka] : key.digit) {
    put_poly(b, kb);
    put_poly(b, ka);
  }
}

KeySwitchKey read_keyswitch_body(Reader& r, const CkksParams& p) {
  KeySwitchKey key;
  key.digit.resize(size_t(p.max_level() + 1));
  for (auto& [kb, ka] : key.digit) {
    kb = read_key_poly(r, p);
    ka = read_key_poly(r, p);
  }
  return key;
}

}  // namespace

std::vector<uint8_t> serialize_relin_key(const CkksParams& p, const KeySwitchKey& key) {
  std::vector<uint8_t> b;
  put_header(b, BlobKind::kRelinKey, p.logn, p.max_level(), int(p.moduli.size()), p.scale);
  put_keyswitch_body(b, key);
  return b;
}

KeySwitchKey parse_relin_key(const CkksParams& p, const std::vector<uint8_t>& blob) {
  Reader r{blob};
  const Header h = read_header(r, p, BlobKind::kRelinKey);
  if (h.limbs != int(p.moduli.size())) throw ConfigError("blob: key limb count mismatch");
  KeySwitchKey key = read_keyswitch_body(r, p);
  r.done();
  return key;
}

std::vector<uint8_t> serialize_rotation_keys(const CkksParams& p,
                                             const std::map<uint32_t, KeySwitchKey>& keys) {
  std::vector<uint8_t> b;
  put_header(b, BlobKind::kRotationKeys, p.logn, p.max_level(), int(p.moduli.size()),
             p.scale);
  put_u32(b, uint32_t(keys.size()));
  for (const auto& [g, key] : keys) {
    put_u32(b, g);
    put_keyswitch_body(b, key);
  }
  return b;
}

std::map<uint32_t, KeySwitchKey> parse_rotation_keys(const CkksParams& p,
                                                     const std::vector<uint8_t>& blob) {
  Reader r{blob};
  const Header h = read_header(r, p, BlobKind::kRotationKeys);
  if (h.limbs != int(p.moduli.size())) throw ConfigError("blob: key limb count mismatch");
  const uint32_t count = r.u32();
  std::map<uint32_t, KeySwitchKey> keys;
  for (uint32_t k = 0; k < count; ++k) {
    const uint32_t g = r.u32();
    if ((g & 1) == 0) throw ConfigError("blob: galois element must be odd");
    keys.emplace(g, read_keyswitch_body(r, p));
  }
  r.done();
  return keys;
}

std::vector<uint8_t> serialize_secret_key(const CkksParams& p, const SecretKey& sk) {
  std::vector<uint8_t> b;
  put_header(b, BlobKind::kSecretKey, p.logn, p.max_level(), int(p.moduli.size()), p.scale);
  put_poly(b, sk.s);
  return b;
}

SecretKey parse_secret_key(const CkksParams& p, const std::vector<uint8_t>& blob) {
  Reader r{blob};
  const Header h = read_header(r, p, BlobKind::kSecretKey);
  if (h.limbs != int(p.moduli.size())) throw ConfigError("blob: key limb count mismatch");
  SecretKey sk;
  sk.s = read_key_poly(r, p);
  r.done();
  return sk;
}

}  // namespace vempc::ckks
