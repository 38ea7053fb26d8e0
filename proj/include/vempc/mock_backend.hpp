// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vempc/he_backend.hpp"

namespace vempc {

// Slot-vector backend with calibrated uniform noise per primitive. Noise is a
// deterministic function of (seed, operand content), so pipelines produce
// identical results regardless of evaluation order or worker count.
class MockBackend : public HeBackend {
 public:
  MockBackend(int slots, int levels, NoiseModel noise, uint64_t seed = 0);

  int slots() const override { return slots_; }
  int levels() const override { return levels_; }
  int level_of(const Ct& c) const override;

  Ct add_ct(const Ct& a, const Ct& b) const override;
  Ct add_pt(const Ct& a, const SlotVector& v) const override;
  Ct mul_ct(const Ct& a, const Ct& b) const override;
  Ct mul_pt(const Ct& a, const SlotVector& v) const override;
  Ct rotate(const Ct& a, int rho) const override;

  Ct encrypt(const SlotVector& v) const override;
  SlotVector decrypt(const Ct& c) const override;

  std::vector<uint8_t> serialize_ct(const Ct& c) const override;
  Ct deserialize_ct(const std::vector<uint8_t>& blob) const override;
  uint64_t params_hash() const override;

  const NoiseModel& noise() const { return noise_; }

 private:
  struct Payload {
    std::vector<double> v;
    int level;
  };
  static const Payload& get(const Ct& c);
  Ct make(std::vector<double> v, int level) const;
  void add_noise(std::vector<double>& v, double magnitude, uint64_t op_tag) const;

  int slots_;
  int levels_;
  NoiseModel noise_;
  uint64_t seed_;
};

}  // namespace vempc
