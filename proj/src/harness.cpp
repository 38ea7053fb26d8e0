// SPDX-License-Identifier: Apache-2.0
#include "vempc/harness.hpp"

#include <json.hpp>

#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <optional>
#include <sstream>
#include <utility>

#include "vempc/ckks/engine.hpp"
#include "vempc/ckks/serial.hpp"
#include "vempc/mock_backend.hpp"
#include "vempc/qp.hpp"
#include "vempc/surrogate.hpp"
#include "vempc/transport.hpp"

namespace vempc {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double ms_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

// ---------------------------------------------------------------- JSON

const json* find(const json& obj, const char* key) {
  if (!obj.is_object()) return nullptr;
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

const json& need(const json& obj, const char* key, const std::string& path) {
  const json* v = find(obj, key);
  if (!v) fail("config: " + path + " is required");
  return *v;
}

double num_field(const json& v, const std::string& path) {
  if (!v.is_number()) fail("config: " + path + " must be a number");
  return v.get<double>();
}

double num_or(const json& obj, const char* key, const std::string& path, double fallback) {
  const json* v = find(obj, key);
  return v ? num_field(*v, path) : fallback;
}

int int_field(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail("config: " + path + " must be an integer");
  return v.get<int>();
}

int int_or(const json& obj, const char* key, const std::string& path, int fallback) {
  const json* v = find(obj, key);
  return v ? int_field(*v, path) : fallback;
}

uint64_t seed_or(const json& obj, const char* key, const std::string& path,
                 uint64_t fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) fail("config: " + path + " must be a nonnegative integer");
  if (!v->is_number_unsigned() && v->get<int64_t>() < 0)
    fail("config: " + path + " must be a nonnegative integer");
  return v->get<uint64_t>();
}

Vec vec_field(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail("config: " + path + " must be a nonempty array");
  Vec out(int(v.size()));
  for (int i = 0; i < int(v.size()); ++i)
    out[i] = num_field(v[size_t(i)], path + "[" + std::to_string(i) + "]");
  return out;
}

Mat mat_field(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail("config: " + path + " must be a matrix");
  const json& first = v[0];
  if (!first.is_array() || first.empty()) fail("config: " + path + " must be a matrix");
  Mat out(int(v.size()), int(first.size()));
  for (int r = 0; r < out.rows(); ++r) {
    const json& row = v[size_t(r)];
    if (!row.is_array() || int(row.size()) != out.cols())
      fail("config: " + path + " rows must have equal length");
    for (int c = 0; c < out.cols(); ++c)
      out(r, c) = num_field(row[size_t(c)],
                            path + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
  }
  return out;
}

std::vector<std::optional<double>> bounds_field(const json& obj, const char* key,
                                                const std::string& path) {
  const json* v = find(obj, key);
  std::vector<std::optional<double>> out;
  if (!v) return out;
  if (!v->is_array()) fail("config: " + path + " must be an array");
  for (size_t i = 0; i < v->size(); ++i) {
    const json& e = (*v)[i];
    if (e.is_null())
      out.emplace_back(std::nullopt);
    else
      out.emplace_back(num_field(e, path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

json vec_json(const Vec& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json mat_json(const Mat& m) {
  json out = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

json bounds_json(const std::vector<std::optional<double>>& b) {
  json out = json::array();
  for (const auto& e : b) {
    if (e)
      out.push_back(*e);
    else
      out.push_back(nullptr);
  }
  return out;
}

// ---------------------------------------------------------------- workers

int env_workers_or(int fallback) {
  const char* env = std::getenv("VEMPC_WORKERS");
  if (!env || !*env) return fallback;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1 || v > 4096)
    fail("config: VEMPC_WORKERS must be a positive integer");
  return int(v);
}

// ---------------------------------------------------------------- backends

std::vector<int> reduce_shifts(int p_hat) {
  std::vector<int> shifts;
  for (int s = 1; s < p_hat; s <<= 1) shifts.push_back(s);
  return shifts;
}

std::unique_ptr<HeBackend> make_backend(const SimConfig& cfg, const RunSetup& s) {
  const int slots = 1 << (cfg.log2_ring - 1);
  if (cfg.mode == RunMode::kVempcMock)
    return std::make_unique<MockBackend>(slots, cfg.depth + 1, cfg.mock_noise, cfg.seed);

  const auto params = ckks::CkksParams::make(cfg.log2_ring, cfg.depth, cfg.log2_scale);
  auto ctx = std::make_shared<const ckks::RnsContext>(params);
  ckks::SecretKey sk = ckks::make_secret_key(*ctx, cfg.seed);
  const PackingLayout lay = PackingLayout::plan(slots, s.plan.dim(), s.plan.rows(), cfg.K);
  auto keys = std::make_shared<const ckks::EvalKeys>(
      ckks::make_eval_keys(*ctx, sk, cfg.seed, reduce_shifts(lay.p_hat)));
  return std::make_unique<ckks::CkksBackend>(std::move(ctx), std::move(keys), std::move(sk));
}

// Evaluation-only view handed to the in-process cloud.
const HeEvaluator& cloud_view(const HeBackend& be) {
  if (const auto* c = dynamic_cast<const ckks::CkksBackend*>(&be)) return c->evaluator();
  return be;
}

// ---------------------------------------------------------------- loop

double realized_margin(const ConstraintSpec& spec, const Vec& x_next, const Vec& u) {
  double margin = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < spec.state_bounds.size(); ++i)
    if (spec.state_bounds[i])
      margin = std::max(margin, std::abs(x_next[int(i)]) - *spec.state_bounds[i]);
  for (size_t i = 0; i < spec.input_bounds.size(); ++i)
    if (spec.input_bounds[i])
      margin = std::max(margin, std::abs(u[int(i)]) - *spec.input_bounds[i]);
  return margin;
}

double violation_tol(RunMode mode) { return mode == RunMode::kQp ? 1e-6 : 0.0; }

class Controller {
 public:
  virtual ~Controller() = default;
  virtual StepLog step(uint32_t t, const Vec& x) = 0;
};

class QpController final : public Controller {
 public:
  explicit QpController(RunSetup s) : s_(std::move(s)) {}

  StepLog step(uint32_t, const Vec& x) override {
    StepLog row;
    const auto t0 = Clock::now();
    const QpResult sol = reference_qp_solve(s_.qp, s_.lc, x);
    row.u = sol.U.head(s_.plan.inputs);
    row.client_ms = row.total_ms = ms_between(t0, Clock::now());
    row.max_score = violation_score(s_.lc.residual(sol.U, x));
    return row;
  }

 private:
  RunSetup s_;
};

class VariationalController final : public Controller {
 public:
  explicit VariationalController(RunSetup s) : s_(std::move(s)) {}

  StepLog step(uint32_t t, const Vec& x) override {
    StepLog row;
    const auto t0 = Clock::now();
    const ProtocolPlan& plan = s_.plan;
    const SampleBatch batch = sample_tilted(plan.tg, x, plan.K, step_seed(plan.seed, t));
    Vec scores(plan.K), weights(plan.K);
    for (int k = 0; k < plan.K; ++k) {
      scores[k] = surrogate_score(plan.surrogate, batch.g.row(k).transpose());
      weights[k] = threshold_weight(plan.rule, scores[k]).second;
    }
    Vec u_hat;
    try {
      u_hat = estimate(batch.U, weights);
    } catch (const NumericalError&) {
      u_hat = plan.tg.mean(x);
      row.fallback = true;
    }
    row.u = u_hat.head(plan.inputs);
    row.client_ms = row.total_ms = ms_between(t0, Clock::now());
    const double total = weights.sum();
    row.ess = total > 0.0 ? 1.0 / Vec(weights / total).squaredNorm() : 0.0;
    row.max_score = scores.maxCoeff();
    return row;
  }

 private:
  RunSetup s_;
};

class ProtocolController final : public Controller {
 public:
  ProtocolController(const SimConfig& cfg, const RunSetup& s)
      : be_(make_backend(cfg, s)), client_(*be_, s.plan) {
    cloud_ = std::make_unique<ProtocolCloud>(cloud_view(*be_), client_.offline(),
                                             env_workers_or(cfg.workers));
  }

  StepLog step(uint32_t t, const Vec& x) override {
    StepLog row;
    const auto t0 = Clock::now();
    const OnlineRequest req = client_.request(t, x);
    const auto t1 = Clock::now();
    const OnlineResponse resp = cloud_->step(req);
    const auto t2 = Clock::now();
    const StepOutcome out = client_.finalize(resp, x);
    const auto t3 = Clock::now();
    row.u = out.u;
    row.client_ms = ms_between(t0, t1) + ms_between(t2, t3);
    row.cloud_ms = ms_between(t1, t2);
    row.total_ms = ms_between(t0, t3);
    row.ess = out.ess;
    row.max_score = out.scores.maxCoeff();
    row.fallback = out.fallback;
    return row;
  }

 private:
  std::unique_ptr<HeBackend> be_;
  ProtocolClient client_;
  std::unique_ptr<ProtocolCloud> cloud_;
};

void fill_timing(TrajectoryLog& log) {
  const size_t first = log.steps.size() > 1 ? 1 : 0;
  double sum = 0.0, sq = 0.0;
  int n = 0;
  for (size_t i = first; i < log.steps.size(); ++i) {
    sum += log.steps[i].total_ms;
    sq += log.steps[i].total_ms * log.steps[i].total_ms;
    ++n;
  }
  if (n == 0) return;
  log.online_mean_ms = sum / n;
  log.online_std_ms = std::sqrt(std::max(0.0, sq / n - log.online_mean_ms * log.online_mean_ms));
}

TrajectoryLog run_loop(const SimConfig& cfg, Controller& ctl) {
  TrajectoryLog log;
  log.mode = cfg.mode;
  Vec x = cfg.x0;
  const double tol = violation_tol(cfg.mode);
  for (int t = 0; t < cfg.steps; ++t) {
    StepLog row = ctl.step(uint32_t(t), x);
    row.t = t;
    row.x = x;
    x = cfg.model.A * x + cfg.model.B * row.u;
    row.margin = realized_margin(cfg.problem.constraints, x, row.u);
    if (row.margin > tol) ++log.violations;
    if (row.fallback) ++log.fallbacks;
    log.steps.push_back(std::move(row));
  }
  log.x_final = x;
  fill_timing(log);
  return log;
}

// ---------------------------------------------------------------- files

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<uint8_t> read_blob(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("file: cannot read " + path.string());
  return std::vector<uint8_t>((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
}

void write_blob(const std::filesystem::path& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("file: cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), long(bytes.size()));
  if (!out) fail("file: cannot write " + path.string());
}

// ---------------------------------------------------------------- wire

void put_u8(std::vector<uint8_t>& out, uint8_t v) { out.push_back(v); }

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(uint8_t(v >> (8 * i)));
}

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(uint8_t(v >> (8 * i)));
}

void put_f64(std::vector<uint8_t>& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  put_u64(out, bits);
}

void put_blob(std::vector<uint8_t>& out, const std::vector<uint8_t>& blob) {
  put_u32(out, uint32_t(blob.size()));
  out.insert(out.end(), blob.begin(), blob.end());
}

struct Reader {
  const std::vector<uint8_t>& buf;
  size_t pos = 0;

  void take(size_t n) {
    if (buf.size() - pos < n) fail("message: truncated");
    pos += n;
  }
  uint8_t u8() {
    take(1);
    return buf[pos - 1];
  }
  uint32_t u32() {
    take(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t(buf[pos - 4 + size_t(i)]) << (8 * i);
    return v;
  }
  uint64_t u64() {
    take(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(buf[pos - 8 + size_t(i)]) << (8 * i);
    return v;
  }
  double f64() {
    const uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  std::vector<uint8_t> blob() {
    const uint32_t n = u32();
    take(n);
    return std::vector<uint8_t>(buf.begin() + long(pos - n), buf.begin() + long(pos));
  }
  void done() const {
    if (pos != buf.size()) fail("message: trailing bytes");
  }
};

constexpr uint8_t kBackendMock = 0;
constexpr uint8_t kBackendCkks = 1;

std::vector<uint8_t> setup_payload(const SimConfig& cfg, const HeBackend& be,
                                   const OfflineBundle& bundle) {
  std::vector<uint8_t> out;
  if (cfg.mode == RunMode::kVempcMock) {
    put_u8(out, kBackendMock);
    put_u32(out, uint32_t(1 << (cfg.log2_ring - 1)));
    put_u32(out, uint32_t(cfg.depth + 1));
    put_f64(out, cfg.mock_noise.e_enc);
    put_f64(out, cfg.mock_noise.e_mult);
    put_f64(out, cfg.mock_noise.e_rot);
    put_u64(out, cfg.seed);
  } else {
    const auto& ckks_be = dynamic_cast<const ckks::CkksBackend&>(be);
    const auto& engine = ckks_be.evaluator().engine();
    put_u8(out, kBackendCkks);
    put_u8(out, uint8_t(cfg.log2_ring));
    put_u8(out, uint8_t(cfg.depth));
    put_u8(out, uint8_t(cfg.log2_scale));
    put_u64(out, engine.keys().seed);
    put_blob(out, ckks::serialize_relin_key(engine.params(), engine.keys().relin));
    put_blob(out, ckks::serialize_rotation_keys(engine.params(), engine.keys().rot));
  }
  put_blob(out, serialize_bundle(be, bundle));
  return out;
}

// Rebuilds an evaluation-only view from a setup frame. The ckks path never
// constructs a SecretKey: the server works from public material alone.
struct CloudContext {
  std::unique_ptr<MockBackend> mock;
  std::unique_ptr<ckks::CkksEvaluator> ckks_eval;
  OfflineBundle bundle;

  const HeEvaluator& eval() const {
    if (mock) return *mock;
    return *ckks_eval;
  }
};

CloudContext parse_setup(const std::vector<uint8_t>& payload) {
  CloudContext ctx;
  Reader r{payload};
  const uint8_t kind = r.u8();
  if (kind == kBackendMock) {
    const uint32_t slots = r.u32();
    const uint32_t levels = r.u32();
    NoiseModel noise;
    noise.e_enc = r.f64();
    noise.e_mult = r.f64();
    noise.e_rot = r.f64();
    const uint64_t seed = r.u64();
    ctx.mock = std::make_unique<MockBackend>(int(slots), int(levels), noise, seed);
  } else if (kind == kBackendCkks) {
    const int logn = r.u8();
    const int depth = r.u8();
    const int log2_scale = r.u8();
    const uint64_t seed = r.u64();
    const auto params = ckks::CkksParams::make(logn, depth, log2_scale);
    ckks::EvalKeys keys;
    keys.relin = ckks::parse_relin_key(params, r.blob());
    keys.rot = ckks::parse_rotation_keys(params, r.blob());
    keys.seed = seed;
    ctx.ckks_eval = std::make_unique<ckks::CkksEvaluator>(
        std::make_shared<const ckks::RnsContext>(params),
        std::make_shared<const ckks::EvalKeys>(std::move(keys)));
  } else {
    fail("transport: unknown backend kind");
  }
  ctx.bundle = parse_bundle(ctx.eval(), r.blob());
  r.done();
  return ctx;
}

class RemoteController final : public Controller {
 public:
  RemoteController(const SimConfig& cfg, const RunSetup& s, const std::string& host,
                   uint16_t port)
      : be_(make_backend(cfg, s)), client_(*be_, s.plan), sock_(tcp_connect(host, port)) {
    sock_.send_frame(FrameKind::kSetup, setup_payload(cfg, *be_, client_.offline()));
  }

  ~RemoteController() override {
    try {
      sock_.send_frame(FrameKind::kBye, {});
    } catch (...) {
    }
  }

  StepLog step(uint32_t t, const Vec& x) override {
    StepLog row;
    const auto t0 = Clock::now();
    const OnlineRequest req = client_.request(t, x);
    const std::vector<uint8_t> bytes = serialize_request(*be_, req);
    const auto t1 = Clock::now();
    sock_.send_frame(FrameKind::kRequest, bytes);
    const auto [kind, body] = sock_.recv_frame();
    const auto t2 = Clock::now();
    if (kind != FrameKind::kResponse) fail("transport: unexpected frame kind");
    const StepOutcome out = client_.finalize(parse_response(*be_, body), x);
    const auto t3 = Clock::now();
    row.u = out.u;
    row.client_ms = ms_between(t0, t1) + ms_between(t2, t3);
    row.cloud_ms = ms_between(t1, t2);  // includes the wire
    row.total_ms = ms_between(t0, t3);
    row.ess = out.ess;
    row.max_score = out.scores.maxCoeff();
    row.fallback = out.fallback;
    return row;
  }

 private:
  std::unique_ptr<HeBackend> be_;
  ProtocolClient client_;
  Socket sock_;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& path) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') fail("csv: bad number in " + path);
  return v;
}

}  // namespace

// ---------------------------------------------------------------- config

RunMode parse_mode(const std::string& name) {
  if (name == "qp") return RunMode::kQp;
  if (name == "variational") return RunMode::kVariational;
  if (name == "vempc-mock") return RunMode::kVempcMock;
  if (name == "vempc-ckks") return RunMode::kVempcCkks;
  fail("config: run.mode must be one of qp|variational|vempc-mock|vempc-ckks");
}

std::string mode_name(RunMode mode) {
  switch (mode) {
    case RunMode::kQp: return "qp";
    case RunMode::kVariational: return "variational";
    case RunMode::kVempcMock: return "vempc-mock";
    case RunMode::kVempcCkks: return "vempc-ckks";
  }
  fail("config: unknown mode");
}

void SimConfig::validate() const {
  model.validate();
  problem.validate(model);
  if (sigma0 <= 0.0) fail("config: sampling.sigma0 must be positive");
  if (lambda <= 0.0) fail("config: sampling.lambda must be positive");
  if (K < 1) fail("config: sampling.K must be at least 1");
  if (degree < 1) fail("config: surrogate.degree must be at least 1");
  if (box.size() != 0 && box.size() != model.n())
    fail("config: surrogate.box size must match the state dimension");
  for (int i = 0; i < box.size(); ++i)
    if (!(box[i] >= 0.0)) fail("config: surrogate.box entries must be nonnegative");
  if (eta <= 0.0) fail("config: weights.eta must be positive");
  if (log2_ring < 4 || log2_ring > 17) fail("config: encryption.log2_ring out of range");
  if (log2_scale < 10 || log2_scale > 50) fail("config: encryption.log2_scale out of range");
  if (depth < 1) fail("config: encryption.depth must be at least 1");
  if (!(mock_noise.e_enc >= 0.0 && mock_noise.e_mult >= 0.0 && mock_noise.e_rot >= 0.0))
    fail("config: encryption.mock_noise entries must be nonnegative");
  if (steps < 1) fail("config: run.steps must be at least 1");
  if (x0.size() != model.n()) fail("config: run.x0 size must match the state dimension");
  if (workers < 1) fail("config: run.workers must be at least 1");
  if ((mode == RunMode::kVempcMock || mode == RunMode::kVempcCkks) && depth < degree)
    fail("config: encryption.depth must be at least surrogate.degree");
}

SimConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    fail(std::string("config: parse error: ") + e.what());
  }
  if (!root.is_object()) fail("config: top level must be an object");
  if (int_or(root, "version", "version", 1) != 1) fail("config: version must be 1");

  SimConfig cfg;
  const json& plant = need(root, "plant", "plant");
  cfg.model.A = mat_field(need(plant, "A", "plant.A"), "plant.A");
  cfg.model.B = mat_field(need(plant, "B", "plant.B"), "plant.B");
  cfg.model.dt = num_or(plant, "dt", "plant.dt", 0.0);

  const json& problem = need(root, "problem", "problem");
  cfg.problem.N = int_field(need(problem, "N", "problem.N"), "problem.N");
  cfg.problem.Q = mat_field(need(problem, "Q", "problem.Q"), "problem.Q");
  cfg.problem.Qf = mat_field(need(problem, "Qf", "problem.Qf"), "problem.Qf");
  cfg.problem.R = mat_field(need(problem, "R", "problem.R"), "problem.R");
  cfg.problem.constraints.state_bounds =
      bounds_field(problem, "state_bounds", "problem.state_bounds");
  cfg.problem.constraints.input_bounds =
      bounds_field(problem, "input_bounds", "problem.input_bounds");

  const json& sampling = need(root, "sampling", "sampling");
  cfg.sigma0 = num_field(need(sampling, "sigma0", "sampling.sigma0"), "sampling.sigma0");
  cfg.lambda = num_field(need(sampling, "lambda", "sampling.lambda"), "sampling.lambda");
  cfg.K = int_field(need(sampling, "K", "sampling.K"), "sampling.K");
  cfg.seed = seed_or(sampling, "seed", "sampling.seed", 0);

  if (const json* surrogate = find(root, "surrogate")) {
    cfg.degree = int_or(*surrogate, "degree", "surrogate.degree", 3);
    if (const json* domain = find(*surrogate, "domain")) {
      if (domain->is_string() && domain->get<std::string>() == "auto") {
        cfg.domain = 0.0;
      } else {
        cfg.domain = num_field(*domain, "surrogate.domain");
        if (cfg.domain <= 0.0) fail("config: surrogate.domain must be positive or \"auto\"");
      }
    }
    if (const json* box = find(*surrogate, "box"))
      cfg.box = vec_field(*box, "surrogate.box");
  }

  if (const json* weights = find(root, "weights")) {
    if (const json* tau = find(*weights, "tau_s")) {
      if (tau->is_string() && tau->get<std::string>() == "auto")
        cfg.tau_s = std::numeric_limits<double>::quiet_NaN();
      else
        cfg.tau_s = num_field(*tau, "weights.tau_s");
    }
    cfg.eta = num_or(*weights, "eta", "weights.eta", 1e3);
  }

  if (const json* enc = find(root, "encryption")) {
    cfg.log2_ring = int_or(*enc, "log2_ring", "encryption.log2_ring", 13);
    cfg.log2_scale = int_or(*enc, "log2_scale", "encryption.log2_scale", 30);
    cfg.depth = int_or(*enc, "depth", "encryption.depth", 3);
    if (const json* noise = find(*enc, "mock_noise")) {
      cfg.mock_noise.e_enc = num_or(*noise, "enc", "encryption.mock_noise.enc", 0.0);
      cfg.mock_noise.e_mult = num_or(*noise, "mult", "encryption.mock_noise.mult", 0.0);
      cfg.mock_noise.e_rot = num_or(*noise, "rot", "encryption.mock_noise.rot", 0.0);
    }
  }

  const json& run = need(root, "run", "run");
  cfg.steps = int_field(need(run, "steps", "run.steps"), "run.steps");
  cfg.x0 = vec_field(need(run, "x0", "run.x0"), "run.x0");
  if (const json* mode = find(run, "mode")) {
    if (!mode->is_string()) fail("config: run.mode must be a string");
    cfg.mode = parse_mode(mode->get<std::string>());
  }
  cfg.workers = int_or(run, "workers", "run.workers", 1);

  if (cfg.box.size() == 0) cfg.box = cfg.x0.cwiseAbs();
  cfg.validate();
  return cfg;
}

SimConfig load_config(const std::string& path) { return parse_config(slurp(path)); }

std::string config_echo(const SimConfig& cfg) {
  json root;
  root["version"] = 1;
  root["plant"] = {{"A", mat_json(cfg.model.A)}, {"B", mat_json(cfg.model.B)},
                   {"dt", cfg.model.dt}};
  root["problem"] = {{"N", cfg.problem.N},
                     {"Q", mat_json(cfg.problem.Q)},
                     {"Qf", mat_json(cfg.problem.Qf)},
                     {"R", mat_json(cfg.problem.R)},
                     {"state_bounds", bounds_json(cfg.problem.constraints.state_bounds)},
                     {"input_bounds", bounds_json(cfg.problem.constraints.input_bounds)}};
  root["sampling"] = {{"sigma0", cfg.sigma0}, {"lambda", cfg.lambda}, {"K", cfg.K},
                      {"seed", cfg.seed}};
  root["surrogate"] = {{"degree", cfg.degree},
                       {"domain", cfg.domain > 0.0 ? json(cfg.domain) : json("auto")},
                       {"box", vec_json(cfg.box)}};
  root["weights"] = {{"tau_s", std::isnan(cfg.tau_s) ? json("auto") : json(cfg.tau_s)},
                     {"eta", cfg.eta}};
  root["encryption"] = {{"log2_ring", cfg.log2_ring},
                        {"log2_scale", cfg.log2_scale},
                        {"depth", cfg.depth},
                        {"mock_noise",
                         {{"enc", cfg.mock_noise.e_enc},
                          {"mult", cfg.mock_noise.e_mult},
                          {"rot", cfg.mock_noise.e_rot}}}};
  root["run"] = {{"steps", cfg.steps},
                 {"x0", vec_json(cfg.x0)},
                 {"mode", mode_name(cfg.mode)},
                 {"workers", cfg.workers}};
  return root.dump(2) + "\n";
}

// ---------------------------------------------------------------- runs

RunSetup build_setup(const SimConfig& cfg) {
  cfg.validate();
  RunSetup s;
  s.qp = condense_cost(cfg.model, cfg.problem);
  s.lc = build_constraints(cfg.problem.constraints, cfg.model, cfg.problem.N, s.qp.Lambda,
                           s.qp.Psi);
  const int dim = cfg.problem.N * cfg.model.m();
  s.plan.tg = tilt(s.qp, s.lc, cfg.sigma0 * Mat::Identity(dim, dim), cfg.lambda);
  const Vec box = cfg.box.size() != 0 ? cfg.box : Vec(cfg.x0.cwiseAbs());
  const double bound = cfg.domain > 0.0 ? cfg.domain : auto_domain_bound(s.plan.tg, box);
  s.plan.surrogate = chebyshev_fit(cfg.degree, bound);
  s.plan.rule.tau_s =
      std::isnan(cfg.tau_s) ? double(s.lc.p()) * s.plan.surrogate.delta : cfg.tau_s;
  s.plan.rule.eta = cfg.eta;
  s.plan.horizon = cfg.problem.N;
  s.plan.inputs = cfg.model.m();
  s.plan.K = cfg.K;
  s.plan.seed = cfg.seed;
  return s;
}

TrajectoryLog closed_loop_run(const SimConfig& cfg) {
  RunSetup s = build_setup(cfg);
  std::unique_ptr<Controller> ctl;
  switch (cfg.mode) {
    case RunMode::kQp:
      ctl = std::make_unique<QpController>(std::move(s));
      break;
    case RunMode::kVariational:
      ctl = std::make_unique<VariationalController>(std::move(s));
      break;
    default:
      ctl = std::make_unique<ProtocolController>(cfg, s);
      break;
  }
  return run_loop(cfg, *ctl);
}

std::vector<TrajectoryLog> compare_modes(const SimConfig& cfg,
                                         const std::vector<RunMode>& modes) {
  if (modes.empty()) fail("config: compare needs at least one mode");
  std::vector<TrajectoryLog> runs;
  runs.reserve(modes.size());
  for (RunMode m : modes) {
    SimConfig c = cfg;
    c.mode = m;
    runs.push_back(closed_loop_run(c));
  }
  return runs;
}

double max_state_dev(const TrajectoryLog& a, const TrajectoryLog& b, int coord) {
  const size_t n = std::min(a.steps.size(), b.steps.size());
  double dev = 0.0;
  for (size_t t = 0; t < n; ++t)
    dev = std::max(dev, std::abs(a.steps[t].x[coord] - b.steps[t].x[coord]));
  if (int(a.x_final.size()) > coord && int(b.x_final.size()) > coord)
    dev = std::max(dev, std::abs(a.x_final[coord] - b.x_final[coord]));
  return dev;
}

double max_input_dev(const TrajectoryLog& a, const TrajectoryLog& b) {
  const size_t n = std::min(a.steps.size(), b.steps.size());
  double dev = 0.0;
  for (size_t t = 0; t < n; ++t)
    dev = std::max(dev, (a.steps[t].u - b.steps[t].u).cwiseAbs().maxCoeff());
  return dev;
}

std::vector<BenchCell> bench_ablation(const SimConfig& cfg, const std::vector<int>& degrees,
                                      const std::vector<int>& log2_rings,
                                      const std::vector<int>& Ks) {
  if (degrees.empty() || log2_rings.empty() || Ks.empty())
    fail("config: bench grid must be nonempty");
  std::vector<BenchCell> cells;
  for (int d : degrees) {
    for (int ln : log2_rings) {
      for (int k : Ks) {
        SimConfig c = cfg;
        c.mode = RunMode::kVempcCkks;
        c.degree = d;
        c.log2_ring = ln;
        c.K = k;
        c.depth = std::max(cfg.depth, d);
        const TrajectoryLog log = closed_loop_run(c);
        cells.push_back(
            {d, ln, k, env_workers_or(c.workers), log.online_mean_ms, log.online_std_ms});
      }
    }
  }
  return cells;
}

// ---------------------------------------------------------------- csv

void emit_csv(const TrajectoryLog& log, const std::string& path) {
  if (log.steps.empty()) fail("csv: empty log");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("csv: cannot open " + path);
  const int n = int(log.steps[0].x.size());
  const int m = int(log.steps[0].u.size());
  out << "t";
  for (int i = 0; i < n; ++i) out << ",x" << i;
  for (int j = 0; j < m; ++j) out << ",u" << j;
  out << ",client_ms,cloud_ms,total_ms,ess,max_score,margin,fallback\n";
  for (const StepLog& s : log.steps) {
    out << s.t;
    for (int i = 0; i < n; ++i) out << ',' << fmt(s.x[i]);
    for (int j = 0; j < m; ++j) out << ',' << fmt(s.u[j]);
    out << ',' << fmt(s.client_ms) << ',' << fmt(s.cloud_ms) << ',' << fmt(s.total_ms) << ','
        << fmt(s.ess) << ',' << fmt(s.max_score) << ',' << fmt(s.margin) << ','
        << (s.fallback ? 1 : 0) << "\n";
  }
  if (!out) fail("csv: write failed for " + path);
}

TrajectoryLog parse_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) fail("csv: missing header in " + path);
  const std::vector<std::string> header = split_csv_line(line);
  int n = 0, m = 0;
  for (const std::string& h : header) {
    if (h.size() >= 2 && h[0] == 'x' && std::isdigit(uint8_t(h[1]))) ++n;
    if (h.size() >= 2 && h[0] == 'u' && std::isdigit(uint8_t(h[1]))) ++m;
  }
  if (header.size() != size_t(1 + n + m + 7)) fail("csv: unexpected header in " + path);

  TrajectoryLog log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != header.size()) fail("csv: bad row in " + path);
    StepLog s;
    size_t c = 0;
    s.t = int(parse_double(f[c++], path));
    s.x = Vec(n);
    for (int i = 0; i < n; ++i) s.x[i] = parse_double(f[c++], path);
    s.u = Vec(m);
    for (int j = 0; j < m; ++j) s.u[j] = parse_double(f[c++], path);
    s.client_ms = parse_double(f[c++], path);
    s.cloud_ms = parse_double(f[c++], path);
    s.total_ms = parse_double(f[c++], path);
    s.ess = parse_double(f[c++], path);
    s.max_score = parse_double(f[c++], path);
    s.margin = parse_double(f[c++], path);
    s.fallback = parse_double(f[c++], path) != 0.0;
    log.steps.push_back(std::move(s));
  }
  return log;
}

void emit_compare_csv(const std::vector<TrajectoryLog>& runs, const std::string& path) {
  if (runs.empty() || runs[0].steps.empty()) fail("csv: empty comparison");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("csv: cannot open " + path);
  out << "t";
  for (const TrajectoryLog& r : runs) {
    const std::string m = mode_name(r.mode);
    out << ",theta_" << m << ",u_" << m << ",margin_" << m;
  }
  for (size_t r = 1; r < runs.size(); ++r) out << ",dev_u_" << mode_name(runs[r].mode);
  out << "\n";
  size_t rows = runs[0].steps.size();
  for (const TrajectoryLog& r : runs) rows = std::min(rows, r.steps.size());
  for (size_t t = 0; t < rows; ++t) {
    out << runs[0].steps[t].t;
    for (const TrajectoryLog& r : runs)
      out << ',' << fmt(r.steps[t].x[0]) << ',' << fmt(r.steps[t].u[0]) << ','
          << fmt(r.steps[t].margin);
    for (size_t r = 1; r < runs.size(); ++r)
      out << ',' << fmt(std::abs(runs[r].steps[t].u[0] - runs[0].steps[t].u[0]));
    out << "\n";
  }
  if (!out) fail("csv: write failed for " + path);
}

void emit_bench_csv(const std::vector<BenchCell>& cells, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("csv: cannot open " + path);
  out << "degree,log2_ring,K,workers,mean_ms,std_ms\n";
  for (const BenchCell& c : cells)
    out << c.degree << ',' << c.log2_ring << ',' << c.K << ',' << c.workers << ','
        << fmt(c.mean_ms) << ',' << fmt(c.std_ms) << "\n";
  if (!out) fail("csv: write failed for " + path);
}

// ---------------------------------------------------------------- remote

int serve_session(Socket& sock, int workers) {
  const auto [kind, payload] = sock.recv_frame();
  if (kind != FrameKind::kSetup) fail("transport: expected setup frame");
  const CloudContext ctx = parse_setup(payload);
  const ProtocolCloud cloud(ctx.eval(), ctx.bundle, workers);
  int served = 0;
  for (;;) {
    const auto [k, body] = sock.recv_frame();
    if (k == FrameKind::kBye) break;
    if (k != FrameKind::kRequest) fail("transport: unexpected frame kind");
    const OnlineResponse resp = cloud.step(parse_request(ctx.eval(), body));
    sock.send_frame(FrameKind::kResponse, serialize_response(ctx.eval(), resp));
    ++served;
  }
  return served;
}

void serve_cloud(uint16_t port, int workers) {
  const Listener listener(port);
  std::printf("vempc cloud: listening on 127.0.0.1:%u\n", unsigned(listener.port()));
  std::fflush(stdout);
  Socket sock = listener.accept_one();
  const int served = serve_session(sock, env_workers_or(workers));
  std::printf("vempc cloud: served %d requests\n", served);
  std::fflush(stdout);
}

TrajectoryLog run_remote(const SimConfig& cfg, const std::string& host, uint16_t port) {
  if (cfg.mode != RunMode::kVempcMock && cfg.mode != RunMode::kVempcCkks)
    fail("config: run.mode must be a vempc mode for remote runs");
  const RunSetup s = build_setup(cfg);
  RemoteController ctl(cfg, s, host, port);
  return run_loop(cfg, ctl);
}

// ---------------------------------------------------------------- artifacts

void write_keys(const SimConfig& cfg, const std::string& dir) {
  const RunSetup s = build_setup(cfg);
  const int slots = 1 << (cfg.log2_ring - 1);
  const PackingLayout lay = PackingLayout::plan(slots, s.plan.dim(), s.plan.rows(), cfg.K);
  const auto params = ckks::CkksParams::make(cfg.log2_ring, cfg.depth, cfg.log2_scale);
  const ckks::RnsContext ctx(params);
  const ckks::SecretKey sk = ckks::make_secret_key(ctx, cfg.seed);
  const ckks::EvalKeys keys =
      ckks::make_eval_keys(ctx, sk, cfg.seed, reduce_shifts(lay.p_hat));
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  write_blob(base / "secret.key", ckks::serialize_secret_key(params, sk));
  write_blob(base / "public.key", ckks::serialize_public_key(params, keys.pk));
  write_blob(base / "relin.key", ckks::serialize_relin_key(params, keys.relin));
  write_blob(base / "rotation.key", ckks::serialize_rotation_keys(params, keys.rot));
}

void write_offline_cache(const SimConfig& cfg, const std::string& keys_dir,
                         const std::string& cache_dir) {
  const RunSetup s = build_setup(cfg);
  const auto params = ckks::CkksParams::make(cfg.log2_ring, cfg.depth, cfg.log2_scale);
  auto ctx = std::make_shared<const ckks::RnsContext>(params);
  const std::filesystem::path base(keys_dir);
  ckks::SecretKey sk = ckks::parse_secret_key(params, read_blob(base / "secret.key"));
  ckks::EvalKeys keys;
  keys.pk = ckks::parse_public_key(params, read_blob(base / "public.key"));
  keys.relin = ckks::parse_relin_key(params, read_blob(base / "relin.key"));
  keys.rot = ckks::parse_rotation_keys(params, read_blob(base / "rotation.key"));
  keys.seed = cfg.seed;
  const ckks::CkksBackend be(std::move(ctx),
                             std::make_shared<const ckks::EvalKeys>(std::move(keys)),
                             std::move(sk));
  const ProtocolClient client(be, s.plan);
  std::filesystem::create_directories(cache_dir);
  write_blob(std::filesystem::path(cache_dir) / "bundle.bin",
             serialize_bundle(be, client.offline()));
}

}  // namespace vempc
