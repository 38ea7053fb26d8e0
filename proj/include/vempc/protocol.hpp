// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "vempc/he_backend.hpp"
#include "vempc/mpc.hpp"
#include "vempc/surrogate.hpp"

namespace vempc {

// Slot packing: every sample owns one power-of-two block per stream, u_hat
// slots for its input vector and p_hat slots for its constraint margins. One
// ciphertext carries `capacity` samples; K samples spread evenly over
// `chunks` ciphertext pairs.
struct PackingLayout {
  int u_hat = 0;
  int p_hat = 0;
  int capacity = 0;
  int chunks = 0;
  std::vector<int> chunk_begin;
  std::vector<int> chunk_count;

  static PackingLayout plan(int slots, int dim, int rows, int K);
};

// Everything the client derives ahead of time from the control problem.
struct ProtocolPlan {
  TiltedGaussian tg;
  Surrogate surrogate;
  WeightRule rule;
  int horizon = 0;
  int inputs = 0;
  int K = 0;
  uint64_t seed = 0;

  int dim() const { return horizon * inputs; }
  int rows() const { return int(tg.Gamma.rows()); }
};

// Offline handoff to the cloud: per-column ciphertexts of L and Gamma plus
// the public evaluation recipe. Nothing here depends on the plant state.
struct OfflineBundle {
  uint64_t params_hash = 0;
  uint64_t seed = 0;
  int dim = 0;
  int rows = 0;
  int K = 0;
  std::vector<double> poly;  // surrogate coefficients c_0..c_ell
  std::vector<HeEvaluator::Ct> lu_cols;
  std::vector<HeEvaluator::Ct> gamma_cols;
};

// Exactly one request and one response cross the wire per control step.
struct OnlineRequest {
  uint64_t params_hash = 0;
  uint32_t step = 0;
  HeEvaluator::Ct u_ct;  // mean input vector, replicated per sample block
  HeEvaluator::Ct g_ct;  // constraint offset, replicated per sample block
};

struct OnlineResponse {
  uint64_t params_hash = 0;
  uint32_t step = 0;
  std::vector<HeEvaluator::Ct> u_out;      // one per chunk
  std::vector<HeEvaluator::Ct> score_out;  // one per chunk
};

struct StepOutcome {
  Vec u;        // first control input
  Vec U_hat;    // weighted estimate over the horizon
  Mat U_tilde;  // K x dim decrypted samples
  Vec scores;   // K decrypted surrogate scores
  Vec weights;
  double ess = 0.0;
  bool fallback = false;  // no informative samples; mean used instead
};

// Per-step sampling stream shared by the cloud and any plaintext reference.
uint64_t step_seed(uint64_t seed, uint32_t step);
Mat xi_matrix(uint64_t seed, uint32_t step, int K, int dim);

// Client half: owns the secret key through the backend reference.
class ProtocolClient {
 public:
  ProtocolClient(const HeBackend& backend, ProtocolPlan plan);

  const PackingLayout& layout() const { return layout_; }
  const ProtocolPlan& plan() const { return plan_; }

  OfflineBundle offline() const;
  OnlineRequest request(uint32_t step, const Vec& x0) const;
  StepOutcome finalize(const OnlineResponse& resp, const Vec& x0) const;

 private:
  const HeBackend& backend_;
  ProtocolPlan plan_;
  PackingLayout layout_;
};

// Cloud half: evaluation keys only; the interface it computes against has no
// decrypt, so holding the secret key is impossible by construction.
class ProtocolCloud {
 public:
  ProtocolCloud(const HeEvaluator& eval, OfflineBundle bundle, int workers = 1);

  const PackingLayout& layout() const { return layout_; }
  OnlineResponse step(const OnlineRequest& req) const;

 private:
  void chunk_step(int c, const Mat& xi, const OnlineRequest& req,
                  OnlineResponse& out) const;

  const HeEvaluator& eval_;
  OfflineBundle bundle_;
  PackingLayout layout_;
  int workers_ = 1;
};

// Wire codecs; ciphertexts go through the evaluator's blob format.
std::vector<uint8_t> serialize_request(const HeEvaluator& eval, const OnlineRequest& req);
OnlineRequest parse_request(const HeEvaluator& eval, const std::vector<uint8_t>& bytes);
std::vector<uint8_t> serialize_response(const HeEvaluator& eval, const OnlineResponse& r);
OnlineResponse parse_response(const HeEvaluator& eval, const std::vector<uint8_t>& bytes);
std::vector<uint8_t> serialize_bundle(const HeEvaluator& eval, const OfflineBundle& b);
OfflineBundle parse_bundle(const HeEvaluator& eval, const std::vector<uint8_t>& bytes);

}  // namespace vempc
