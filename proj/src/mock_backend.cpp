// SPDX-License-Identifier: Apache-2.0
#include "vempc/mock_backend.hpp"

#include <algorithm>
#include <cstring>

#include "vempc/rng.hpp"

namespace vempc {

namespace {
constexpr uint64_t kTagEnc = 0x01, kTagMul = 0x02, kTagRot = 0x03;
}

MockBackend::MockBackend(int slots, int levels, NoiseModel noise, uint64_t seed)
    : slots_(slots), levels_(levels), noise_(noise), seed_(seed) {
  if (slots < 1 || (slots & (slots - 1)) != 0)
    throw ConfigError("mock backend: slot count must be a power of two");
  if (levels < 1) throw ConfigError("mock backend: levels must be >= 1");
}

const MockBackend::Payload& MockBackend::get(const Ct& c) {
  if (!c.valid()) throw ConfigError("mock backend: empty ciphertext handle");
  return *static_cast<const Payload*>(c.payload.get());
}

HeEvaluator::Ct MockBackend::make(std::vector<double> v, int level) const {
  auto p = std::make_shared<Payload>();
  p->v = std::move(v);
  p->level = level;
  return Ct{std::shared_ptr<const void>(p, p.get())};
}

void MockBackend::add_noise(std::vector<double>& v, double magnitude,
                            uint64_t op_tag) const {
  if (magnitude <= 0.0) return;
  uint64_t h = fnv1a64(v.data(), v.size() * sizeof(double));
  h = fnv1a64_u64(op_tag, h);
  for (size_t i = 0; i < v.size(); ++i)
    v[i] += magnitude * uniform_signed(seed_, RngDomain::kMockNoise, h, uint32_t(i));
}

int MockBackend::level_of(const Ct& c) const { return get(c).level; }

HeEvaluator::Ct MockBackend::add_ct(const Ct& a, const Ct& b) const {
  const auto& pa = get(a);
  const auto& pb = get(b);
  const int level = std::min(pa.level, pb.level);
  std::vector<double> out(pa.v.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = pa.v[i] + pb.v[i];
  return make(std::move(out), level);
}

HeEvaluator::Ct MockBackend::add_pt(const Ct& a, const SlotVector& v) const {
  const auto& pa = get(a);
  if (int(v.size()) != slots_) throw ConfigError("mock backend: plaintext slot-count mismatch");
  std::vector<double> out(pa.v.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = pa.v[i] + v[i];
  return make(std::move(out), pa.level);
}

HeEvaluator::Ct MockBackend::mul_ct(const Ct& a, const Ct& b) const {
  const auto& pa = get(a);
  const auto& pb = get(b);
  const int level = std::min(pa.level, pb.level);
  if (level < 1) throw NumericalError("mock backend: level underflow");
  std::vector<double> out(pa.v.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = pa.v[i] * pb.v[i];
  add_noise(out, noise_.e_mult, kTagMul);
  return make(std::move(out), level - 1);
}

HeEvaluator::Ct MockBackend::mul_pt(const Ct& a, const SlotVector& v) const {
  const auto& pa = get(a);
  if (int(v.size()) != slots_) throw ConfigError("mock backend: plaintext slot-count mismatch");
  if (pa.level < 1) throw NumericalError("mock backend: level underflow");
  std::vector<double> out(pa.v.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = pa.v[i] * v[i];
  add_noise(out, noise_.e_mult, kTagMul);
  return make(std::move(out), pa.level - 1);
}

HeEvaluator::Ct MockBackend::rotate(const Ct& a, int rho) const {
  const auto& pa = get(a);
  const int s = slots_;
  const int shift = ((rho % s) + s) % s;
  std::vector<double> out(static_cast<size_t>(s));
  for (int i = 0; i < s; ++i) out[size_t(i)] = pa.v[size_t((i + shift) % s)];
  add_noise(out, noise_.e_rot, kTagRot + (uint64_t(shift) << 8));
  return make(std::move(out), pa.level);
}

HeEvaluator::Ct MockBackend::encrypt(const SlotVector& v) const {
  if (int(v.size()) != slots_) throw ConfigError("mock backend: plaintext slot-count mismatch");
  std::vector<double> out = v;
  add_noise(out, noise_.e_enc, kTagEnc);
  return make(std::move(out), levels_);
}

SlotVector MockBackend::decrypt(const Ct& c) const { return get(c).v; }

std::vector<uint8_t> MockBackend::serialize_ct(const Ct& c) const {
  const auto& p = get(c);
  std::vector<uint8_t> blob(8 + p.v.size() * sizeof(double));
  const uint32_t level = uint32_t(p.level);
  const uint32_t count = uint32_t(p.v.size());
  std::memcpy(blob.data(), &level, 4);
  std::memcpy(blob.data() + 4, &count, 4);
  std::memcpy(blob.data() + 8, p.v.data(), p.v.size() * sizeof(double));
  return blob;
}

HeEvaluator::Ct MockBackend::deserialize_ct(const std::vector<uint8_t>& blob) const {
  if (blob.size() < 8) throw ConfigError("mock backend: truncated ciphertext blob");
  uint32_t level = 0, count = 0;
  std::memcpy(&level, blob.data(), 4);
  std::memcpy(&count, blob.data() + 4, 4);
  if (blob.size() != 8 + size_t(count) * sizeof(double) || int(count) != slots_)
    throw ConfigError("mock backend: malformed ciphertext blob");
  std::vector<double> v(count);
  std::memcpy(v.data(), blob.data() + 8, size_t(count) * sizeof(double));
  return make(std::move(v), int(level));
}

uint64_t MockBackend::params_hash() const {
  uint64_t h = fnv1a64_u64(uint64_t(slots_), 0xcbf29ce484222325ull);
  h = fnv1a64_u64(uint64_t(levels_), h);
  h = fnv1a64(&noise_, sizeof(noise_), h);
  h = fnv1a64_u64(seed_, h);
  return h;
}

}  // namespace vempc
