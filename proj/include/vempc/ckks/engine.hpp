// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "vempc/ckks/encoder.hpp"
#include "vempc/ckks/keys.hpp"
#include "vempc/ckks/rns.hpp"
#include "vempc/he_backend.hpp"

namespace vempc::ckks {

struct CkksCiphertext {
  RnsPoly c0, c1;
  int level = 0;
  double scale = 1.0;
};

// Stateless evaluation core; holds parameters and public keys only. The
// secret key is passed explicitly to decrypt so cloud-side wrappers cannot
// reach it.
class CkksEngine {
 public:
  CkksEngine(std::shared_ptr<const RnsContext> ctx, std::shared_ptr<const EvalKeys> keys);

  const RnsContext& ctx() const { return *ctx_; }
  const CkksParams& params() const { return ctx_->params(); }
  const EvalKeys& keys() const { return *keys_; }
  const CkksEncoder& encoder() const { return encoder_; }

  // Symmetric encryption: the client holds sk and is the only encrypting
  // party, and the sk form carries far less fresh noise than pk encryption.
  CkksCiphertext encrypt(const SlotVector& v, double scale, uint64_t enc_index,
                         const SecretKey& sk) const;
  SlotVector decrypt(const CkksCiphertext& ct, const SecretKey& sk) const;

  CkksCiphertext add(const CkksCiphertext& a, const CkksCiphertext& b) const;
  CkksCiphertext add_plain(const CkksCiphertext& a, const SlotVector& v) const;
  CkksCiphertext mul_plain(const CkksCiphertext& a, const SlotVector& v) const;
  CkksCiphertext mul(const CkksCiphertext& a, const CkksCiphertext& b) const;
  CkksCiphertext rotate(const CkksCiphertext& a, int rho) const;

  CkksCiphertext drop_to_level(const CkksCiphertext& a, int level) const;
  uint64_t params_hash() const { return params().params_hash(); }

 private:
  RnsPoly encode_rns(const SlotVector& v, double scale, int level) const;
  std::pair<RnsPoly, RnsPoly> keyswitch(const RnsPoly& c2, const KeySwitchKey& key,
                                        int level) const;
  void rescale_poly(RnsPoly& p, int level) const;

  std::shared_ptr<const RnsContext> ctx_;
  std::shared_ptr<const EvalKeys> keys_;
  CkksEncoder encoder_;
};

// Cloud-side evaluator: public material only, no decrypt member exists.
class CkksEvaluator : public HeEvaluator {
 public:
  CkksEvaluator(std::shared_ptr<const RnsContext> ctx,
                std::shared_ptr<const EvalKeys> keys);

  int slots() const override;
  int levels() const override;
  int level_of(const Ct& c) const override;
  Ct add_ct(const Ct& a, const Ct& b) const override;
  Ct add_pt(const Ct& a, const SlotVector& v) const override;
  Ct mul_ct(const Ct& a, const Ct& b) const override;
  Ct mul_pt(const Ct& a, const SlotVector& v) const override;
  Ct rotate(const Ct& a, int rho) const override;
  std::vector<uint8_t> serialize_ct(const Ct& c) const override;
  Ct deserialize_ct(const std::vector<uint8_t>& blob) const override;
  uint64_t params_hash() const override;

  const CkksEngine& engine() const { return engine_; }
  static Ct wrap(CkksCiphertext ct);
  static const CkksCiphertext& unwrap(const Ct& c);

 protected:
  CkksEngine engine_;
};

// Client-side backend: evaluator plus key material for encrypt/decrypt.
class CkksBackend final : public HeBackend {
 public:
  CkksBackend(std::shared_ptr<const RnsContext> ctx, std::shared_ptr<const EvalKeys> keys,
              SecretKey sk);

  int slots() const override;
  int levels() const override;
  int level_of(const Ct& c) const override;
  Ct add_ct(const Ct& a, const Ct& b) const override;
  Ct add_pt(const Ct& a, const SlotVector& v) const override;
  Ct mul_ct(const Ct& a, const Ct& b) const override;
  Ct mul_pt(const Ct& a, const SlotVector& v) const override;
  Ct rotate(const Ct& a, int rho) const override;
  std::vector<uint8_t> serialize_ct(const Ct& c) const override;
  Ct deserialize_ct(const std::vector<uint8_t>& blob) const override;
  uint64_t params_hash() const override;

  Ct encrypt(const SlotVector& v) const override;
  SlotVector decrypt(const Ct& c) const override;
  Ct encrypt_aligned(const SlotVector& v) const override;

  // Fresh encryption at an explicit scale (protocol offline path).
  Ct encrypt_at(const SlotVector& v, double scale) const;
  double default_scale() const { return eval_.engine().params().scale; }
  const CkksEvaluator& evaluator() const { return eval_; }

 private:
  CkksEvaluator eval_;
  SecretKey sk_;
  mutable uint64_t enc_counter_ = 0;
};

}  // namespace vempc::ckks
