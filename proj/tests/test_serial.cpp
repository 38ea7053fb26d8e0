// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstring>
#include <limits>
#include <memory>
#include <vector>

#include "backend_suite.hpp"
#include "vempc/ckks/engine.hpp"
#include "vempc/ckks/serial.hpp"

using namespace vempc;
using namespace vempc::ckks;
using vempc::testing::max_abs_diff;
using vempc::testing::random_slots;

namespace {

struct Fixture {
  CkksParams params = CkksParams::make(9, 2, 30);
  std::shared_ptr<const RnsContext> ctx = std::make_shared<const RnsContext>(params);
  SecretKey sk = make_secret_key(*ctx, 404);
  std::shared_ptr<const EvalKeys> keys =
      std::make_shared<const EvalKeys>(make_eval_keys(*ctx, sk, 404, {1, 3}));
  CkksEngine engine{ctx, keys};

  CkksCiphertext fresh(uint64_t stream) const {
    return engine.encrypt(random_slots(params.slots(), stream), params.scale, stream, sk);
  }
};

void set_scale_bytes(std::vector<uint8_t>& blob, double scale) {
  std::memcpy(blob.data() + 12, &scale, sizeof(scale));
}

}  // namespace

TEST_CASE("blob ciphertext roundtrip is bitwise stable") {
  const Fixture f;
  const CkksCiphertext ct = f.fresh(1);
  const auto blob = serialize_ciphertext(f.params, ct);
  const CkksCiphertext back = parse_ciphertext(f.params, blob);
  CHECK(serialize_ciphertext(f.params, back) == blob);
  CHECK(back.level == ct.level);
  CHECK(back.scale == ct.scale);
  CHECK(max_abs_diff(f.engine.decrypt(back, f.sk), f.engine.decrypt(ct, f.sk)) == 0.0);

  // A non-fresh level also survives.
  const CkksCiphertext low = f.engine.mul_plain(ct, random_slots(f.params.slots(), 2));
  const auto blob_low = serialize_ciphertext(f.params, low);
  CHECK(serialize_ciphertext(f.params, parse_ciphertext(f.params, blob_low)) == blob_low);
}

TEST_CASE("blob plaintext roundtrip preserves level and scale") {
  const Fixture f;
  const CkksCiphertext ct = f.fresh(3);
  const auto blob = serialize_plaintext(f.params, ct.c0, ct.level, ct.scale);
  int level = -1;
  double scale = 0.0;
  const RnsPoly poly = parse_plaintext(f.params, blob, &level, &scale);
  CHECK(level == ct.level);
  CHECK(scale == ct.scale);
  CHECK(serialize_plaintext(f.params, poly, level, scale) == blob);
}

TEST_CASE("blob key kinds roundtrip bitwise") {
  const Fixture f;
  const auto pk_blob = serialize_public_key(f.params, f.keys->pk);
  CHECK(serialize_public_key(f.params, parse_public_key(f.params, pk_blob)) == pk_blob);

  const auto relin_blob = serialize_relin_key(f.params, f.keys->relin);
  CHECK(serialize_relin_key(f.params, parse_relin_key(f.params, relin_blob)) == relin_blob);

  const auto rot_blob = serialize_rotation_keys(f.params, f.keys->rot);
  const auto rot_back = parse_rotation_keys(f.params, rot_blob);
  CHECK(rot_back.size() == f.keys->rot.size());
  CHECK(serialize_rotation_keys(f.params, rot_back) == rot_blob);

  const auto sk_blob = serialize_secret_key(f.params, f.sk);
  CHECK(serialize_secret_key(f.params, parse_secret_key(f.params, sk_blob)) == sk_blob);
}

TEST_CASE("blob header corruption is rejected with a named cause") {
  const Fixture f;
  const auto good = serialize_ciphertext(f.params, f.fresh(4));

  auto blob = good;
  blob[0] = 'X';
  CHECK_THROWS_WITH_AS((void)parse_ciphertext(f.params, blob), "blob: bad magic",
                       ConfigError);

  blob = good;
  blob[4] = 9;
  CHECK_THROWS_WITH_AS((void)parse_ciphertext(f.params, blob), "blob: unsupported version",
                       ConfigError);

  blob = good;
  blob[6] = uint8_t(BlobKind::kPublicKey);
  CHECK_THROWS_WITH_AS((void)parse_ciphertext(f.params, blob), "blob: unexpected kind",
                       ConfigError);

  blob = good;
  blob[7] = 10;
  CHECK_THROWS_WITH_AS((void)parse_ciphertext(f.params, blob), "blob: ring size mismatch",
                       ConfigError);

  blob = good;
  blob[8] = 200;
  CHECK_THROWS_WITH_AS((void)parse_ciphertext(f.params, blob), "blob: level out of range",
                       ConfigError);

  blob = good;
  blob[9] = uint8_t(blob[8] + 2);
  CHECK_THROWS_WITH_AS((void)parse_ciphertext(f.params, blob),
                       "blob: limb count inconsistent with level", ConfigError);

  blob = good;
  blob[10] = 1;
  CHECK_THROWS_WITH_AS((void)parse_ciphertext(f.params, blob),
                       "blob: reserved field not zero", ConfigError);

  blob = good;
  set_scale_bytes(blob, std::numeric_limits<double>::infinity());
  CHECK_THROWS_WITH_AS((void)parse_ciphertext(f.params, blob),
                       "blob: scale must be finite and positive", ConfigError);
  set_scale_bytes(blob, -1.0);
  CHECK_THROWS_WITH_AS((void)parse_ciphertext(f.params, blob),
                       "blob: scale must be finite and positive", ConfigError);
}

TEST_CASE("blob body corruption is rejected with a named cause") {
  const Fixture f;
  const auto good = serialize_ciphertext(f.params, f.fresh(5));

  auto blob = good;
  blob.resize(blob.size() - 3);
  CHECK_THROWS_WITH_AS((void)parse_ciphertext(f.params, blob), "blob: truncated",
                       ConfigError);

  blob = good;
  blob.push_back(0);
  CHECK_THROWS_WITH_AS((void)parse_ciphertext(f.params, blob), "blob: trailing bytes",
                       ConfigError);

  blob = good;
  for (int i = 0; i < 8; ++i) blob[size_t(20 + i)] = 0xff;
  CHECK_THROWS_WITH_AS((void)parse_ciphertext(f.params, blob),
                       "blob: coefficient exceeds modulus", ConfigError);

  auto rot = serialize_rotation_keys(f.params, f.keys->rot);
  rot[24] = 0x04;  // low byte of the first Galois element
  CHECK_THROWS_WITH_AS((void)parse_rotation_keys(f.params, rot),
                       "blob: galois element must be odd", ConfigError);
}

TEST_CASE("blob evaluator interface round trips across instances") {
  const Fixture f;
  const CkksEvaluator eval_a(f.ctx, f.keys);
  auto ctx_b = std::make_shared<const RnsContext>(f.params);
  SecretKey sk_b = make_secret_key(*ctx_b, 404);
  auto keys_b = std::make_shared<const EvalKeys>(make_eval_keys(*ctx_b, sk_b, 404, {1, 3}));
  const CkksEvaluator eval_b(ctx_b, keys_b);

  const auto ct = CkksEvaluator::wrap(f.fresh(6));
  const auto blob = eval_a.serialize_ct(ct);
  const auto back = eval_b.deserialize_ct(blob);
  CHECK(eval_b.serialize_ct(back) == blob);
  CHECK(eval_a.params_hash() == eval_b.params_hash());

  // Parsing against a different ring size fails.
  const CkksParams other = CkksParams::make(10, 2, 30);
  CHECK_THROWS_WITH_AS((void)parse_ciphertext(other, blob), "blob: ring size mismatch",
                       ConfigError);
}
