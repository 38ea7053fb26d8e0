// SPDX-License-Identifier: Apache-2.0
#include "vempc/protocol.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <thread>
#include <utility>

#include "vempc/rng.hpp"

namespace vempc {

// The cloud computes against HeEvaluator only; the contract must stay free
// of any decryption entry point.
template <typename E>
constexpr bool exposes_decrypt = requires(const E& e, typename E::Ct c) { e.decrypt(c); };
static_assert(!exposes_decrypt<HeEvaluator>,
              "evaluation interface must not expose decryption");
static_assert(exposes_decrypt<HeBackend>, "client backend must expose decryption");

namespace {

int next_pow2(int x) {
  int p = 1;
  while (p < x) p <<= 1;
  return p;
}

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(what);
}

// v into the first v.size() slots of each of `count` sample blocks.
SlotVector fill_blocks(int slots, int block, int count, const Vec& v) {
  SlotVector out(static_cast<size_t>(slots), 0.0);
  for (int s = 0; s < count; ++s)
    for (int r = 0; r < int(v.size()); ++r) out[size_t(s * block + r)] = v[r];
  return out;
}

// Block-constant mask: sample s's whole block carries xi(begin + s, j).
SlotVector xi_mask(int slots, int block, int begin, int count, const Mat& xi, int j) {
  SlotVector out(static_cast<size_t>(slots), 0.0);
  for (int s = 0; s < count; ++s) {
    const double v = xi(begin + s, j);
    for (int r = 0; r < block; ++r) out[size_t(s * block + r)] = v;
  }
  return out;
}

}  // namespace

PackingLayout PackingLayout::plan(int slots, int dim, int rows, int K) {
  require(dim >= 1 && rows >= 1 && K >= 1, "packing: dims must be positive");
  PackingLayout lay;
  lay.u_hat = next_pow2(dim);
  lay.p_hat = next_pow2(rows);
  require(lay.u_hat <= slots && lay.p_hat <= slots,
          "packing: sample block exceeds slot count");
  lay.capacity = std::min(slots / lay.u_hat, slots / lay.p_hat);
  lay.chunks = (K + lay.capacity - 1) / lay.capacity;
  const int base = K / lay.chunks, rem = K % lay.chunks;
  int at = 0;
  for (int c = 0; c < lay.chunks; ++c) {
    lay.chunk_begin.push_back(at);
    lay.chunk_count.push_back(base + (c < rem ? 1 : 0));
    at += lay.chunk_count.back();
  }
  return lay;
}

uint64_t step_seed(uint64_t seed, uint32_t step) {
  return fnv1a64_u64(uint64_t(step), fnv1a64_u64(seed));
}

Mat xi_matrix(uint64_t seed, uint32_t step, int K, int dim) {
  const uint64_t s = step_seed(seed, step);
  Mat xi(K, dim);
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < dim; ++j)
      xi(i, j) = gaussian_at(s, RngDomain::kXi, uint64_t(i), uint64_t(j));
  return xi;
}

ProtocolClient::ProtocolClient(const HeBackend& backend, ProtocolPlan plan)
    : backend_(backend), plan_(std::move(plan)) {
  require(plan_.horizon >= 1 && plan_.inputs >= 1 && plan_.K >= 1,
          "protocol: plan dims must be positive");
  require(int(plan_.tg.L.rows()) == plan_.dim(), "protocol: tilt factor shape mismatch");
  require(int(plan_.tg.Gamma.cols()) == plan_.dim(),
          "protocol: constraint factor shape mismatch");
  require(!plan_.surrogate.coeffs.empty(), "protocol: surrogate has no coefficients");
  layout_ = PackingLayout::plan(backend_.slots(), plan_.dim(), plan_.rows(), plan_.K);
}

OfflineBundle ProtocolClient::offline() const {
  OfflineBundle b;
  b.params_hash = backend_.params_hash();
  b.seed = plan_.seed;
  b.dim = plan_.dim();
  b.rows = plan_.rows();
  b.K = plan_.K;
  b.poly = plan_.surrogate.coeffs;
  for (int j = 0; j < b.dim; ++j) {
    b.lu_cols.push_back(backend_.encrypt(
        fill_blocks(backend_.slots(), layout_.u_hat, layout_.capacity, plan_.tg.L.col(j))));
    b.gamma_cols.push_back(backend_.encrypt(fill_blocks(
        backend_.slots(), layout_.p_hat, layout_.capacity, plan_.tg.Gamma.col(j))));
  }
  return b;
}

OnlineRequest ProtocolClient::request(uint32_t step, const Vec& x0) const {
  OnlineRequest req;
  req.params_hash = backend_.params_hash();
  req.step = step;
  req.u_ct = backend_.encrypt_aligned(
      fill_blocks(backend_.slots(), layout_.u_hat, layout_.capacity, plan_.tg.mean(x0)));
  req.g_ct = backend_.encrypt_aligned(
      fill_blocks(backend_.slots(), layout_.p_hat, layout_.capacity, plan_.tg.offset(x0)));
  return req;
}

StepOutcome ProtocolClient::finalize(const OnlineResponse& resp, const Vec& x0) const {
  if (resp.params_hash != backend_.params_hash())
    throw ConfigError("protocol: params hash mismatch");
  require(int(resp.u_out.size()) == layout_.chunks &&
              int(resp.score_out.size()) == layout_.chunks,
          "protocol: response chunk count mismatch");

  StepOutcome out;
  out.U_tilde = Mat(plan_.K, plan_.dim());
  out.scores = Vec(plan_.K);
  out.weights = Vec(plan_.K);
  // Padded margin slots carry h(0) each; remove them from the block sums.
  const double pad = double(layout_.p_hat - plan_.rows()) * plan_.surrogate.coeffs[0];
  for (int c = 0; c < layout_.chunks; ++c) {
    const SlotVector du = backend_.decrypt(resp.u_out[size_t(c)]);
    const SlotVector ds = backend_.decrypt(resp.score_out[size_t(c)]);
    for (int s = 0; s < layout_.chunk_count[size_t(c)]; ++s) {
      const int k = layout_.chunk_begin[size_t(c)] + s;
      for (int r = 0; r < plan_.dim(); ++r)
        out.U_tilde(k, r) = du[size_t(s * layout_.u_hat + r)];
      out.scores[k] = ds[size_t(s * layout_.p_hat)] - pad;
      out.weights[k] = threshold_weight(plan_.rule, out.scores[k]).second;
    }
  }

  try {
    out.U_hat = estimate(out.U_tilde, out.weights);
  } catch (const NumericalError&) {
    out.U_hat = plan_.tg.mean(x0);
    out.fallback = true;
  }
  // Normalize before squaring so extreme weights cannot underflow the sum.
  const double total = out.weights.sum();
  out.ess = total > 0.0 ? 1.0 / Vec(out.weights / total).squaredNorm() : 0.0;
  out.u = out.U_hat.head(plan_.inputs);
  return out;
}

ProtocolCloud::ProtocolCloud(const HeEvaluator& eval, OfflineBundle bundle, int workers)
    : eval_(eval), bundle_(std::move(bundle)), workers_(workers) {
  if (bundle_.params_hash != eval_.params_hash())
    throw ConfigError("protocol: params hash mismatch");
  require(bundle_.dim >= 1 && bundle_.rows >= 1 && bundle_.K >= 1,
          "protocol: bundle dims must be positive");
  require(int(bundle_.lu_cols.size()) == bundle_.dim &&
              int(bundle_.gamma_cols.size()) == bundle_.dim,
          "protocol: bundle column count mismatch");
  require(!bundle_.poly.empty(), "protocol: bundle has no surrogate coefficients");
  require(workers_ >= 1, "protocol: workers must be positive");
  layout_ = PackingLayout::plan(eval_.slots(), bundle_.dim, bundle_.rows, bundle_.K);
}

void ProtocolCloud::chunk_step(int c, const Mat& xi, const OnlineRequest& req,
                               OnlineResponse& out) const {
  const int slots = eval_.slots();
  const int begin = layout_.chunk_begin[size_t(c)];
  const int count = layout_.chunk_count[size_t(c)];

  auto masked_sum = [&](const std::vector<HeEvaluator::Ct>& cols, int block) {
    HeEvaluator::Ct acc =
        eval_.mul_pt(cols[0], xi_mask(slots, block, begin, count, xi, 0));
    for (int j = 1; j < bundle_.dim; ++j)
      acc = eval_.add_ct(
          acc, eval_.mul_pt(cols[size_t(j)], xi_mask(slots, block, begin, count, xi, j)));
    return acc;
  };

  out.u_out[size_t(c)] =
      eval_.add_ct(req.u_ct, masked_sum(bundle_.lu_cols, layout_.u_hat));
  const HeEvaluator::Ct g =
      eval_.add_ct(req.g_ct, masked_sum(bundle_.gamma_cols, layout_.p_hat));
  out.score_out[size_t(c)] =
      eval_.sum_reduce_segments(eval_.eval_poly(g, bundle_.poly), layout_.p_hat);
}

OnlineResponse ProtocolCloud::step(const OnlineRequest& req) const {
  if (req.params_hash != eval_.params_hash())
    throw ConfigError("protocol: params hash mismatch");
  const Mat xi = xi_matrix(bundle_.seed, req.step, bundle_.K, bundle_.dim);

  OnlineResponse out;
  out.params_hash = eval_.params_hash();
  out.step = req.step;
  out.u_out.resize(size_t(layout_.chunks));
  out.score_out.resize(size_t(layout_.chunks));

  const int nw = std::min(workers_, layout_.chunks);
  if (nw <= 1) {
    for (int c = 0; c < layout_.chunks; ++c) chunk_step(c, xi, req, out);
    return out;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errs(static_cast<size_t>(nw));
  std::vector<std::thread> pool;
  for (int w = 0; w < nw; ++w)
    pool.emplace_back([&, w] {
      try {
        for (int c; (c = next.fetch_add(1)) < layout_.chunks;)
          chunk_step(c, xi, req, out);
      } catch (...) {
        errs[size_t(w)] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (const auto& e : errs)
    if (e) std::rethrow_exception(e);
  return out;
}

namespace {

void put_u32(std::vector<uint8_t>& b, uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(uint8_t(v >> (8 * i)));
}
void put_u64(std::vector<uint8_t>& b, uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back(uint8_t(v >> (8 * i)));
}
void put_f64(std::vector<uint8_t>& b, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  put_u64(b, bits);
}
void put_blob(std::vector<uint8_t>& b, const std::vector<uint8_t>& blob) {
  put_u32(b, uint32_t(blob.size()));
  b.insert(b.end(), blob.begin(), blob.end());
}

struct Reader {
  const std::vector<uint8_t>& b;
  size_t pos = 0;

  void need(size_t n) const {
    if (pos + n > b.size()) throw ConfigError("message: truncated");
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
  double f64() {
    const uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }
  std::vector<uint8_t> blob() {
    const uint32_t len = u32();
    need(len);
    std::vector<uint8_t> out(b.begin() + long(pos), b.begin() + long(pos + len));
    pos += len;
    return out;
  }
  void done() const {
    if (pos != b.size()) throw ConfigError("message: trailing bytes");
  }
};

}  // namespace

std::vector<uint8_t> serialize_request(const HeEvaluator& eval, const OnlineRequest& req) {
  std::vector<uint8_t> b;
  put_u64(b, req.params_hash);
  put_u32(b, req.step);
  put_blob(b, eval.serialize_ct(req.u_ct));
  put_blob(b, eval.serialize_ct(req.g_ct));
  return b;
}

OnlineRequest parse_request(const HeEvaluator& eval, const std::vector<uint8_t>& bytes) {
  Reader r{bytes};
  OnlineRequest req;
  req.params_hash = r.u64();
  req.step = r.u32();
  req.u_ct = eval.deserialize_ct(r.blob());
  req.g_ct = eval.deserialize_ct(r.blob());
  r.done();
  return req;
}

std::vector<uint8_t> serialize_response(const HeEvaluator& eval, const OnlineResponse& resp) {
  std::vector<uint8_t> b;
  put_u64(b, resp.params_hash);
  put_u32(b, resp.step);
  put_u32(b, uint32_t(resp.u_out.size()));
  for (const auto& c : resp.u_out) put_blob(b, eval.serialize_ct(c));
  for (const auto& c : resp.score_out) put_blob(b, eval.serialize_ct(c));
  return b;
}

OnlineResponse parse_response(const HeEvaluator& eval, const std::vector<uint8_t>& bytes) {
  Reader r{bytes};
  OnlineResponse resp;
  resp.params_hash = r.u64();
  resp.step = r.u32();
  const uint32_t chunks = r.u32();
  for (uint32_t c = 0; c < chunks; ++c) resp.u_out.push_back(eval.deserialize_ct(r.blob()));
  for (uint32_t c = 0; c < chunks; ++c)
    resp.score_out.push_back(eval.deserialize_ct(r.blob()));
  r.done();
  return resp;
}

std::vector<uint8_t> serialize_bundle(const HeEvaluator& eval, const OfflineBundle& b) {
  std::vector<uint8_t> out;
  put_u64(out, b.params_hash);
  put_u64(out, b.seed);
  put_u32(out, uint32_t(b.dim));
  put_u32(out, uint32_t(b.rows));
  put_u32(out, uint32_t(b.K));
  put_u32(out, uint32_t(b.poly.size()));
  for (double c : b.poly) put_f64(out, c);
  for (const auto& c : b.lu_cols) put_blob(out, eval.serialize_ct(c));
  for (const auto& c : b.gamma_cols) put_blob(out, eval.serialize_ct(c));
  return out;
}

OfflineBundle parse_bundle(const HeEvaluator& eval, const std::vector<uint8_t>& bytes) {
  Reader r{bytes};
  OfflineBundle b;
  b.params_hash = r.u64();
  b.seed = r.u64();
  b.dim = int(r.u32());
  b.rows = int(r.u32());
  b.K = int(r.u32());
  const uint32_t ncoef = r.u32();
  for (uint32_t i = 0; i < ncoef; ++i) b.poly.push_back(r.f64());
  if (b.dim < 1 || b.dim > 1 << 20) throw ConfigError("message: bad bundle dimension");
  for (int j = 0; j < b.dim; ++j) b.lu_cols.push_back(eval.deserialize_ct(r.blob()));
  for (int j = 0; j < b.dim; ++j) b.gamma_cols.push_back(eval.deserialize_ct(r.blob()));
  r.done();
  return b;
}

}  // namespace vempc
