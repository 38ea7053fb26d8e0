// SPDX-License-Identifier: Apache-2.0
#include "vempc/ckks/engine.hpp"

#include <cmath>

#include "vempc/ckks/serial.hpp"
#include "vempc/common.hpp"

namespace vempc::ckks {

namespace {

void mul_acc_row(std::vector<uint64_t>& dst, const std::vector<uint64_t>& x,
                 const std::vector<uint64_t>& y, uint64_t q) {
  for (size_t i = 0; i < dst.size(); ++i)
    dst[i] = addmod(dst[i], mulmod(x[i], y[i], q), q);
}

void reduce_coeffs(const std::vector<uint64_t>& src, std::vector<uint64_t>& dst,
                   uint64_t q) {
  dst.resize(src.size());
  for (size_t i = 0; i < src.size(); ++i) dst[i] = src[i] % q;
}

}  // namespace

CkksEngine::CkksEngine(std::shared_ptr<const RnsContext> ctx,
                       std::shared_ptr<const EvalKeys> keys)
    : ctx_(std::move(ctx)), keys_(std::move(keys)), encoder_(ctx_->params().logn) {}

RnsPoly CkksEngine::encode_rns(const SlotVector& v, double scale, int level) const {
  return ctx_->lift_signed(encoder_.encode(v, scale), level + 1);
}

CkksCiphertext CkksEngine::encrypt(const SlotVector& v, double scale, uint64_t enc_index,
                                   const SecretKey& sk) const {
  const auto& p = ctx_->params();
  const int level = p.max_level();
  const RnsPoly m = encode_rns(v, scale, level);
  const RnsPoly a =
      sample_uniform_poly(*ctx_, keys_->seed, key_stream(4, enc_index), p.q_limbs());
  const auto e = sample_gaussian_rounded(p.n(), keys_->seed, RngDomain::kEncryptRand,
                                         key_stream(4, enc_index));
  const RnsPoly ep = ctx_->lift_signed(e, p.q_limbs());

  CkksCiphertext ct;
  ct.level = level;
  ct.scale = scale;
  ct.c1 = a;
  ct.c0.limb.resize(size_t(p.q_limbs()));
  for (int mi = 0; mi < p.q_limbs(); ++mi) {
    const uint64_t q = p.moduli[size_t(mi)];
    const auto& ar = a.limb[size_t(mi)];
    const auto& sr = sk.s.limb[size_t(mi)];
    auto& c0 = ct.c0.limb[size_t(mi)];
    c0.resize(size_t(p.n()));
    for (int i = 0; i < p.n(); ++i) {
      const size_t k = size_t(i);
      const uint64_t as = mulmod(ar[k], sr[k], q);
      const uint64_t neg = as == 0 ? 0 : q - as;
      c0[k] = addmod(addmod(neg, ep.limb[size_t(mi)][k], q), m.limb[size_t(mi)][k], q);
    }
  }
  return ct;
}

SlotVector CkksEngine::decrypt(const CkksCiphertext& ct, const SecretKey& sk) const {
  const auto& p = ctx_->params();
  const uint64_t q0 = p.moduli[0];
  RnsPoly m;
  m.limb.resize(1);
  auto& row = m.limb[0];
  row.resize(size_t(p.n()));
  const auto& c0 = ct.c0.limb.at(0);
  const auto& c1 = ct.c1.limb.at(0);
  const auto& s = sk.s.limb.at(0);
  for (int i = 0; i < p.n(); ++i)
    row[size_t(i)] = addmod(c0[size_t(i)], mulmod(c1[size_t(i)], s[size_t(i)], q0), q0);
  return encoder_.decode(ctx_->center_lift_limb0(m), ct.scale);
}

CkksCiphertext CkksEngine::drop_to_level(const CkksCiphertext& a, int level) const {
  if (level > a.level) throw NumericalError("ckks: cannot raise ciphertext level");
  CkksCiphertext out = a;
  out.c0.limb.resize(size_t(level + 1));
  out.c1.limb.resize(size_t(level + 1));
  out.level = level;
  return out;
}

CkksCiphertext CkksEngine::add(const CkksCiphertext& a, const CkksCiphertext& b) const {
  const int level = std::min(a.level, b.level);
  CkksCiphertext x = a.level == level ? a : drop_to_level(a, level);
  const CkksCiphertext y = b.level == level ? b : drop_to_level(b, level);
  const double ratio = x.scale / y.scale;
  if (!(ratio > 0.5 && ratio < 2.0)) throw NumericalError("add: scale mismatch");
  const auto& p = ctx_->params();
  for (int mi = 0; mi <= level; ++mi) {
    const uint64_t q = p.moduli[size_t(mi)];
    auto& r0 = x.c0.limb[size_t(mi)];
    auto& r1 = x.c1.limb[size_t(mi)];
    for (int i = 0; i < p.n(); ++i) {
      r0[size_t(i)] = addmod(r0[size_t(i)], y.c0.limb[size_t(mi)][size_t(i)], q);
      r1[size_t(i)] = addmod(r1[size_t(i)], y.c1.limb[size_t(mi)][size_t(i)], q);
    }
  }
  return x;
}

CkksCiphertext CkksEngine::add_plain(const CkksCiphertext& a, const SlotVector& v) const {
  const auto& p = ctx_->params();
  const RnsPoly m = encode_rns(v, a.scale, a.level);
  CkksCiphertext out = a;
  for (int mi = 0; mi <= a.level; ++mi) {
    const uint64_t q = p.moduli[size_t(mi)];
    auto& row = out.c0.limb[size_t(mi)];
    for (int i = 0; i < p.n(); ++i)
      row[size_t(i)] = addmod(row[size_t(i)], m.limb[size_t(mi)][size_t(i)], q);
  }
  return out;
}

void CkksEngine::rescale_poly(RnsPoly& p, int level) const {
  const auto& prm = ctx_->params();
  std::vector<uint64_t> top = p.limb[size_t(level)];
  ctx_->table(level).inverse(top.data());
  std::vector<uint64_t> tmp;
  for (int i = 0; i < level; ++i) {
    const uint64_t q = prm.moduli[size_t(i)];
    reduce_coeffs(top, tmp, q);
    ctx_->table(i).forward(tmp.data());
    const uint64_t qinv = ctx_->q_inv_mod(level, i);
    auto& row = p.limb[size_t(i)];
    for (size_t k = 0; k < row.size(); ++k)
      row[k] = mulmod(submod(row[k], tmp[k], q), qinv, q);
  }
  p.limb.pop_back();
}

CkksCiphertext CkksEngine::mul_plain(const CkksCiphertext& a, const SlotVector& v) const {
  if (a.level < 1) throw NumericalError("mul_plain: level underflow");
  const auto& p = ctx_->params();
  const RnsPoly m = encode_rns(v, a.scale, a.level);
  CkksCiphertext out = a;
  for (int mi = 0; mi <= a.level; ++mi) {
    const uint64_t q = p.moduli[size_t(mi)];
    auto& r0 = out.c0.limb[size_t(mi)];
    auto& r1 = out.c1.limb[size_t(mi)];
    const auto& mr = m.limb[size_t(mi)];
    for (int i = 0; i < p.n(); ++i) {
      r0[size_t(i)] = mulmod(r0[size_t(i)], mr[size_t(i)], q);
      r1[size_t(i)] = mulmod(r1[size_t(i)], mr[size_t(i)], q);
    }
  }
  rescale_poly(out.c0, a.level);
  rescale_poly(out.c1, a.level);
  out.level = a.level - 1;
  out.scale = a.scale * a.scale / double(p.moduli[size_t(a.level)]);
  return out;
}

std::pair<RnsPoly, RnsPoly> CkksEngine::keyswitch(const RnsPoly& c2,
                                                  const KeySwitchKey& key,
                                                  int level) const {
  const auto& p = ctx_->params();
  const int n = p.n();
  const int special = ctx_->special_idx();
  const int rows = level + 2;  // q_0..q_level plus the special prime

  RnsPoly acc0, acc1;
  acc0.limb.assign(size_t(rows), std::vector<uint64_t>(size_t(n), 0));
  acc1.limb.assign(size_t(rows), std::vector<uint64_t>(size_t(n), 0));

  std::vector<uint64_t> digit_coeffs, tmp;
  for (int j = 0; j <= level; ++j) {
    digit_coeffs = c2.limb[size_t(j)];
    ctx_->table(j).inverse(digit_coeffs.data());
    for (int t = 0; t < rows; ++t) {
      const int mi = t == rows - 1 ? special : t;
      const uint64_t q = p.moduli[size_t(mi)];
      const int key_row = t == rows - 1 ? int(p.moduli.size()) - 1 : t;
      if (mi == j) {
        tmp = c2.limb[size_t(j)];  // iNTT then NTT is the identity
      } else {
        reduce_coeffs(digit_coeffs, tmp, q);
        ctx_->table(mi).forward(tmp.data());
      }
      mul_acc_row(acc0.limb[size_t(t)], tmp, key.digit[size_t(j)].first.limb[size_t(key_row)], q);
      mul_acc_row(acc1.limb[size_t(t)], tmp, key.digit[size_t(j)].second.limb[size_t(key_row)], q);
    }
  }

  // ModDown: divide by the special prime and drop its row.
  for (RnsPoly* acc : {&acc0, &acc1}) {
    std::vector<uint64_t> cp = acc->limb[size_t(rows - 1)];
    ctx_->table(special).inverse(cp.data());
    for (int i = 0; i <= level; ++i) {
      const uint64_t q = p.moduli[size_t(i)];
      reduce_coeffs(cp, tmp, q);
      ctx_->table(i).forward(tmp.data());
      const uint64_t pinv = ctx_->p_inv_mod(i);
      auto& row = acc->limb[size_t(i)];
      for (size_t k = 0; k < row.size(); ++k)
        row[k] = mulmod(submod(row[k], tmp[k], q), pinv, q);
    }
    acc->limb.pop_back();
  }
  return {std::move(acc0), std::move(acc1)};
}

CkksCiphertext CkksEngine::mul(const CkksCiphertext& a, const CkksCiphertext& b) const {
  const int level = std::min(a.level, b.level);
  if (level < 1) throw NumericalError("mul: level underflow");
  const CkksCiphertext x = a.level == level ? a : drop_to_level(a, level);
  const CkksCiphertext y = b.level == level ? b : drop_to_level(b, level);
  const auto& p = ctx_->params();
  const int n = p.n();

  RnsPoly d0, d1, d2;
  d0.limb.assign(size_t(level + 1), std::vector<uint64_t>(size_t(n), 0));
  d1.limb.assign(size_t(level + 1), std::vector<uint64_t>(size_t(n), 0));
  d2.limb.assign(size_t(level + 1), std::vector<uint64_t>(size_t(n), 0));
  for (int mi = 0; mi <= level; ++mi) {
    const uint64_t q = p.moduli[size_t(mi)];
    const auto& x0 = x.c0.limb[size_t(mi)];
    const auto& x1 = x.c1.limb[size_t(mi)];
    const auto& y0 = y.c0.limb[size_t(mi)];
    const auto& y1 = y.c1.limb[size_t(mi)];
    auto& r0 = d0.limb[size_t(mi)];
    auto& r1 = d1.limb[size_t(mi)];
    auto& r2 = d2.limb[size_t(mi)];
    for (int i = 0; i < n; ++i) {
      const size_t k = size_t(i);
      r0[k] = mulmod(x0[k], y0[k], q);
      r1[k] = addmod(mulmod(x0[k], y1[k], q), mulmod(x1[k], y0[k], q), q);
      r2[k] = mulmod(x1[k], y1[k], q);
    }
  }

  auto ks = keyswitch(d2, keys_->relin, level);
  CkksCiphertext out;
  out.level = level;
  out.scale = x.scale * y.scale;
  out.c0 = std::move(d0);
  out.c1 = std::move(d1);
  for (int mi = 0; mi <= level; ++mi) {
    const uint64_t q = p.moduli[size_t(mi)];
    auto& r0 = out.c0.limb[size_t(mi)];
    auto& r1 = out.c1.limb[size_t(mi)];
    for (int i = 0; i < n; ++i) {
      r0[size_t(i)] = addmod(r0[size_t(i)], ks.first.limb[size_t(mi)][size_t(i)], q);
      r1[size_t(i)] = addmod(r1[size_t(i)], ks.second.limb[size_t(mi)][size_t(i)], q);
    }
  }
  rescale_poly(out.c0, level);
  rescale_poly(out.c1, level);
  out.level = level - 1;
  out.scale = out.scale / double(p.moduli[size_t(level)]);
  return out;
}

CkksCiphertext CkksEngine::rotate(const CkksCiphertext& a, int rho) const {
  const auto& p = ctx_->params();
  const int slots = p.slots();
  const int r = ((rho % slots) + slots) % slots;
  if (r == 0) return a;
  const uint32_t g = galois_element(p, r);
  const auto it = keys_->rot.find(g);
  if (it == keys_->rot.end())
    throw ConfigError("rotate: missing rotation key for galois element " + std::to_string(g));

  CkksCiphertext perm = a;
  for (int mi = 0; mi <= a.level; ++mi) {
    const auto pm = ctx_->table(mi).galois_perm(g);
    const auto& s0 = a.c0.limb[size_t(mi)];
    const auto& s1 = a.c1.limb[size_t(mi)];
    auto& t0 = perm.c0.limb[size_t(mi)];
    auto& t1 = perm.c1.limb[size_t(mi)];
    for (size_t i = 0; i < pm.size(); ++i) {
      t0[i] = s0[pm[i]];
      t1[i] = s1[pm[i]];
    }
  }

  auto ks = keyswitch(perm.c1, it->second, a.level);
  CkksCiphertext out;
  out.level = a.level;
  out.scale = a.scale;
  out.c0 = std::move(perm.c0);
  out.c1 = std::move(ks.second);
  for (int mi = 0; mi <= a.level; ++mi) {
    const uint64_t q = p.moduli[size_t(mi)];
    auto& row = out.c0.limb[size_t(mi)];
    for (size_t i = 0; i < row.size(); ++i)
      row[i] = addmod(row[i], ks.first.limb[size_t(mi)][i], q);
  }
  return out;
}

CkksEvaluator::CkksEvaluator(std::shared_ptr<const RnsContext> ctx,
                             std::shared_ptr<const EvalKeys> keys)
    : engine_(std::move(ctx), std::move(keys)) {}

HeEvaluator::Ct CkksEvaluator::wrap(CkksCiphertext ct) {
  return Ct{std::make_shared<const CkksCiphertext>(std::move(ct))};
}

const CkksCiphertext& CkksEvaluator::unwrap(const Ct& c) {
  if (!c.valid()) throw NumericalError("ckks: empty ciphertext handle");
  return *static_cast<const CkksCiphertext*>(c.payload.get());
}

int CkksEvaluator::slots() const { return engine_.params().slots(); }
int CkksEvaluator::levels() const { return engine_.params().max_level(); }
int CkksEvaluator::level_of(const Ct& c) const { return unwrap(c).level; }

HeEvaluator::Ct CkksEvaluator::add_ct(const Ct& a, const Ct& b) const {
  return wrap(engine_.add(unwrap(a), unwrap(b)));
}
HeEvaluator::Ct CkksEvaluator::add_pt(const Ct& a, const SlotVector& v) const {
  return wrap(engine_.add_plain(unwrap(a), v));
}
HeEvaluator::Ct CkksEvaluator::mul_ct(const Ct& a, const Ct& b) const {
  return wrap(engine_.mul(unwrap(a), unwrap(b)));
}
HeEvaluator::Ct CkksEvaluator::mul_pt(const Ct& a, const SlotVector& v) const {
  return wrap(engine_.mul_plain(unwrap(a), v));
}
HeEvaluator::Ct CkksEvaluator::rotate(const Ct& a, int rho) const {
  return wrap(engine_.rotate(unwrap(a), rho));
}
std::vector<uint8_t> CkksEvaluator::serialize_ct(const Ct& c) const {
  return serialize_ciphertext(engine_.params(), unwrap(c));
}
HeEvaluator::Ct CkksEvaluator::deserialize_ct(const std::vector<uint8_t>& blob) const {
  return wrap(parse_ciphertext(engine_.params(), blob));
}
uint64_t CkksEvaluator::params_hash() const { return engine_.params_hash(); }

CkksBackend::CkksBackend(std::shared_ptr<const RnsContext> ctx,
                         std::shared_ptr<const EvalKeys> keys, SecretKey sk)
    : eval_(std::move(ctx), std::move(keys)), sk_(std::move(sk)) {}

int CkksBackend::slots() const { return eval_.slots(); }
int CkksBackend::levels() const { return eval_.levels(); }
int CkksBackend::level_of(const Ct& c) const { return eval_.level_of(c); }
HeEvaluator::Ct CkksBackend::add_ct(const Ct& a, const Ct& b) const {
  return eval_.add_ct(a, b);
}
HeEvaluator::Ct CkksBackend::add_pt(const Ct& a, const SlotVector& v) const {
  return eval_.add_pt(a, v);
}
HeEvaluator::Ct CkksBackend::mul_ct(const Ct& a, const Ct& b) const {
  return eval_.mul_ct(a, b);
}
HeEvaluator::Ct CkksBackend::mul_pt(const Ct& a, const SlotVector& v) const {
  return eval_.mul_pt(a, v);
}
HeEvaluator::Ct CkksBackend::rotate(const Ct& a, int rho) const {
  return eval_.rotate(a, rho);
}
std::vector<uint8_t> CkksBackend::serialize_ct(const Ct& c) const {
  return eval_.serialize_ct(c);
}
HeEvaluator::Ct CkksBackend::deserialize_ct(const std::vector<uint8_t>& blob) const {
  return eval_.deserialize_ct(blob);
}
uint64_t CkksBackend::params_hash() const { return eval_.params_hash(); }

HeEvaluator::Ct CkksBackend::encrypt(const SlotVector& v) const {
  return encrypt_at(v, eval_.engine().params().scale);
}
HeEvaluator::Ct CkksBackend::encrypt_aligned(const SlotVector& v) const {
  // Must equal the mul_plain output scale bit for bit so add_ct accepts the
  // pair without any scale drift.
  const auto& p = eval_.engine().params();
  const double scale = p.scale * p.scale / double(p.moduli[size_t(p.max_level())]);
  return encrypt_at(v, scale);
}
HeEvaluator::Ct CkksBackend::encrypt_at(const SlotVector& v, double scale) const {
  return CkksEvaluator::wrap(eval_.engine().encrypt(v, scale, enc_counter_++, sk_));
}
SlotVector CkksBackend::decrypt(const Ct& c) const {
  return eval_.engine().decrypt(CkksEvaluator::unwrap(c), sk_);
}

}  // namespace vempc::ckks
