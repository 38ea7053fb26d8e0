// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "vempc/ckks/modmath.hpp"

namespace vempc::ckks {

// Negacyclic NTT tables for Z_q[X]/(X^N + 1).
class NttTables {
 public:
  NttTables(int logn, uint64_t q);

  int n() const { return n_; }
  uint64_t q() const { return q_; }
  uint64_t psi() const { return psi_; }

  // In place; forward leaves values in the table's internal evaluation order,
  // inverse expects that order and restores coefficient order.
  void forward(uint64_t* a) const;
  void inverse(uint64_t* a) const;

  // Odd exponent e such that evaluation slot i holds a(psi^e).
  uint32_t exponent_at(int i) const { return exp_of_idx_[size_t(i)]; }

  // Permutation p for a(X) -> a(X^g): out[i] = in[p[i]] in evaluation order.
  std::vector<uint32_t> galois_perm(uint32_t g) const;

 private:
  int logn_, n_;
  uint64_t q_, psi_, ninv_, ninv_shoup_;
  std::vector<uint64_t> psi_br_, psi_br_shoup_;    // forward twiddles, bit-reversed
  std::vector<uint64_t> ipsi_br_, ipsi_br_shoup_;  // inverse twiddles, bit-reversed
  std::vector<uint32_t> exp_of_idx_;               // eval index -> psi exponent
  std::vector<uint32_t> idx_of_exp_;               // psi exponent (odd) -> eval index
};

// Schoolbook negacyclic transforms for oracle tests.
std::vector<uint64_t> negacyclic_eval_reference(const NttTables& t,
                                                const std::vector<uint64_t>& coeffs);
std::vector<uint64_t> negacyclic_mul_reference(const std::vector<uint64_t>& a,
                                               const std::vector<uint64_t>& b, uint64_t q);

}  // namespace vempc::ckks
