// SPDX-License-Identifier: Apache-2.0
// Acceptance gate: one self-contained check per shipped guarantee; prints one
// PASS/FAIL line per criterion and exits nonzero if any checked criterion
// fails. Run a single criterion with --criterion N.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "helpers.hpp"
#include "vempc/budget.hpp"
#include "vempc/ckks/engine.hpp"
#include "vempc/ckks/modmath.hpp"
#include "vempc/ckks/ntt.hpp"
#include "vempc/ckks/serial.hpp"
#include "vempc/harness.hpp"
#include "vempc/mpc.hpp"
#include "vempc/protocol.hpp"
#include "vempc/qp.hpp"
#include "vempc/rng.hpp"
#include "vempc/surrogate.hpp"

using namespace vempc;
using vempc::testing::kPendulumLambda;
using vempc::testing::pendulum_model;
using vempc::testing::pendulum_problem;
using vempc::testing::pendulum_sigma0;
using vempc::testing::weighted_mean_se;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* spec, ...) {
  char buf[512];
  va_list args;
  va_start(args, spec);
  vsnprintf(buf, sizeof(buf), spec, args);
  va_end(args);
  return std::string(buf);
}

// ---------------------------------------------------------------- random

PlantModel random_model(uint64_t seed, int n, int m) {
  PlantModel model;
  model.A = Mat(n, n);
  model.B = Mat(n, m);
  uint64_t idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      model.A(i, j) = 0.6 * gaussian_at(seed, RngDomain::kTest, 1, idx++);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      model.B(i, j) = gaussian_at(seed, RngDomain::kTest, 2, idx++);
  return model;
}

Mat random_spd(uint64_t seed, uint64_t stream, int d, double shift) {
  Mat M(d, d);
  uint64_t idx = 0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) M(i, j) = gaussian_at(seed, RngDomain::kTest, stream, idx++);
  return M * M.transpose() + shift * Mat::Identity(d, d);
}

Vec random_vec(uint64_t seed, uint64_t stream, int d) {
  Vec v(d);
  for (int i = 0; i < d; ++i) v(i) = gaussian_at(seed, RngDomain::kTest, stream, uint64_t(i));
  return v;
}

SlotVector random_payload(int slots, uint64_t stream) {
  SlotVector v(static_cast<size_t>(slots));
  for (int i = 0; i < slots; ++i)
    v[size_t(i)] = uniform_signed(90210, RngDomain::kTest, stream, uint32_t(i));
  return v;
}

double max_abs_diff(const SlotVector& a, const SlotVector& b) {
  double worst = 0.0;
  for (size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

// ---------------------------------------------------------------- shared

std::string shipped_config() {
  return std::string(VEMPC_SOURCE_DIR) + "/configs/pendulum.json";
}

std::vector<int> reduce_shifts(int p_hat) {
  std::vector<int> shifts;
  for (int s = 1; s < p_hat; s <<= 1) shifts.push_back(s);
  return shifts;
}

ckks::CkksBackend pendulum_ckks_backend(int logn, int depth, uint64_t seed, int p_hat) {
  auto params = ckks::CkksParams::make(logn, depth, 30);
  auto ctx = std::make_shared<const ckks::RnsContext>(params);
  ckks::SecretKey sk = ckks::make_secret_key(*ctx, seed);
  auto keys = std::make_shared<const ckks::EvalKeys>(
      ckks::make_eval_keys(*ctx, sk, seed, reduce_shifts(p_hat)));
  return ckks::CkksBackend(std::move(ctx), std::move(keys), std::move(sk));
}

// ---------------------------------------------------------------- 1

bool criterion1(std::string& detail) {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (uint64_t trial = 0; trial < 100; ++trial) {
    const int n = 1 + int(uniform_below(5, RngDomain::kTest, 100 + trial, 0, 4));
    const int m = 1 + int(uniform_below(5, RngDomain::kTest, 100 + trial, 1, 2));
    const int N = 1 + int(uniform_below(5, RngDomain::kTest, 100 + trial, 2, 8));
    const PlantModel model = random_model(200 + trial, n, m);
    MpcProblem problem;
    problem.N = N;
    problem.Q = random_spd(300 + trial, 0, n, 0.1);
    problem.Qf = random_spd(300 + trial, 1, n, 0.1);
    problem.R = random_spd(300 + trial, 2, m, 0.5);
    const CondensedQp qp = condense_cost(model, problem);

    const Vec x0 = random_vec(400 + trial, 0, n);
    const Vec U = random_vec(400 + trial, 1, N * m);
    const double direct = rollout_cost(model, problem, x0, U);
    const double condensed = 0.5 * U.dot(qp.H * U) + x0.dot(qp.S * U) + x0.dot(qp.P * x0);
    const double rel = std::abs(direct - condensed) / std::max(1.0, std::abs(direct));
    worst = std::max(worst, rel);
    if (rel > 1e-10) {
      detail = fmt("trial %llu rel err %.3e > 1e-10", (unsigned long long)trial, rel);
      return false;
    }
  }
  const double secs = seconds_since(t0);
  detail = fmt("100 random systems, worst rel err %.2e, %.2fs", worst, secs);
  return secs < 5.0;
}

// ---------------------------------------------------------------- 2

struct Instance1D {
  double a, b, q, qf, r, lam, sig0sq, umax, x0;
  uint64_t seed;
};

struct TiltSetup {
  CondensedQp qp;
  LinearConstraints lc;
  TiltedGaussian tg;
};

TiltSetup build_1d(const Instance1D& ins) {
  PlantModel model;
  model.A = Mat{{ins.a}};
  model.B = Mat{{ins.b}};
  MpcProblem problem;
  problem.N = 1;
  problem.Q = Mat{{ins.q}};
  problem.Qf = Mat{{ins.qf}};
  problem.R = Mat{{ins.r}};
  problem.constraints.input_bounds = {ins.umax};
  TiltSetup s;
  s.qp = condense_cost(model, problem);
  s.lc = build_constraints(problem.constraints, model, 1, s.qp.Lambda, s.qp.Psi);
  s.tg = tilt(s.qp, s.lc, Mat{{ins.sig0sq}}, ins.lam);
  return s;
}

bool criterion2(std::string& detail) {
  const auto t0 = Clock::now();
  const int K = 1000000;
  double worst_z = 0.0;

  // Active-constraint instances: tilted estimator with the exact indicator
  // against the direct reference-measure estimator on a common xi stream.
  const Instance1D active[] = {
      {1.0, 1.0, 1.0, 1.0, 1.0, 0.5, 0.25, 0.5, 0.9, 11},
      {0.8, 1.2, 0.5, 2.0, 0.3, 0.3, 0.16, 0.4, -0.7, 12},
      {1.1, 0.9, 2.0, 1.5, 0.5, 1.0, 0.36, 0.3, 0.5, 13},
  };
  for (const Instance1D& ins : active) {
    const TiltSetup s = build_1d(ins);
    const Vec x0 = Mat{{ins.x0}};
    const SampleBatch batch = sample_tilted(s.tg, x0, K, ins.seed);

    Vec ind(K);
    for (int i = 0; i < K; ++i)
      ind[i] = batch.g.row(i).maxCoeff() <= 0.0 ? 1.0 : 0.0;
    const Vec u_tilt = batch.U.col(0);
    const double hat19 = estimate(batch.U, ind)[0];
    const double se19 = weighted_mean_se(u_tilt, ind);

    const double sig0 = std::sqrt(ins.sig0sq);
    const double H = s.qp.H(0, 0), S = s.qp.S(0, 0);
    Vec u_base(K), wlog(K);
    double wmax = -1e300;
    for (int i = 0; i < K; ++i) {
      const double u = sig0 * batch.xi(i, 0);
      u_base[i] = u;
      wlog[i] = -(0.5 * H * u * u + ins.x0 * S * u) / ins.lam;
      if (std::abs(u) <= ins.umax) wmax = std::max(wmax, wlog[i]);
    }
    Vec w12(K);
    for (int i = 0; i < K; ++i)
      w12[i] = std::abs(u_base[i]) <= ins.umax ? std::exp(wlog[i] - wmax) : 0.0;
    const double hat12 = u_base.dot(w12) / w12.sum();
    const double se12 = weighted_mean_se(u_base, w12);

    const double gap = std::abs(hat19 - hat12);
    const double se = std::sqrt(se19 * se19 + se12 * se12);
    worst_z = std::max(worst_z, gap / se);
    if (gap > 3.0 * se) {
      detail = fmt("active seed %llu: |%.6f - %.6f| = %.2e > 3x combined SE %.2e",
                   (unsigned long long)ins.seed, hat19, hat12, gap, se);
      return false;
    }
  }

  // Interior instances: no constraint within reach, so the estimator must
  // recover the tilted mean.
  const Instance1D interior[] = {
      {1.0, 1.0, 1.0, 1.0, 1.0, 0.5, 0.25, 1e6, 0.4, 14},
      {0.8, 1.2, 0.5, 2.0, 0.3, 0.3, 0.16, 1e6, -0.3, 15},
  };
  for (const Instance1D& ins : interior) {
    const TiltSetup s = build_1d(ins);
    const Vec x0 = Mat{{ins.x0}};
    const SampleBatch batch = sample_tilted(s.tg, x0, K, ins.seed);
    const Vec ones = Vec::Ones(K);
    const double hat = estimate(batch.U, ones)[0];
    const double se = weighted_mean_se(batch.U.col(0), ones);
    const double gap = std::abs(hat - s.tg.mean(x0)[0]);
    worst_z = std::max(worst_z, gap / se);
    if (gap > 3.0 * se) {
      detail = fmt("interior seed %llu: |Uhat - m_U| = %.2e > 3x SE %.2e",
                   (unsigned long long)ins.seed, gap, se);
      return false;
    }
  }

  const double secs = seconds_since(t0);
  detail = fmt("5 instances at K=1e6, worst gap %.2f SE, %.1fs", worst_z, secs);
  return secs < 30.0;
}

// ---------------------------------------------------------------- 3

bool criterion3(std::string& detail) {
  const Surrogate sur = chebyshev_fit(3, 1.0);
  if (sur.delta > 0.09) {
    detail = fmt("delta_3 = %.5f > 0.09", sur.delta);
    return false;
  }

  const int p = 60;
  const double bound = p * sur.delta;
  double worst = 0.0;
  for (uint64_t t = 0; t < 10000; ++t) {
    Vec g(p);
    for (int j = 0; j < p; ++j)
      g[j] = uniform_signed(777, RngDomain::kTest, t, uint32_t(j));
    const double gap = std::abs(violation_score(g) - surrogate_score(sur, g));
    worst = std::max(worst, gap);
    if (gap > bound) {
      detail = fmt("aggregate bound violated: %.5f > %.5f", gap, bound);
      return false;
    }
  }

  const WeightRule rule{bound, 1e3};
  for (uint64_t t = 0; t < 10000; ++t) {
    Vec g(p);
    for (int j = 0; j < p; ++j)
      g[j] = -0.5 * (1.0 + uniform_signed(778, RngDomain::kTest, t, uint32_t(j)));
    const double w = threshold_weight(rule, surrogate_score(sur, g)).second;
    if (w != 1.0) {
      detail = fmt("feasible in-domain sample got weight %.17g != 1", w);
      return false;
    }
  }

  detail = fmt("delta_3 = %.5f, worst |s - s_l| = %.3f <= %.3f, 1e4 feasible weights exactly 1",
               sur.delta, worst, bound);
  return true;
}

// ---------------------------------------------------------------- 4

std::vector<uint64_t> random_limb(int n, uint64_t q, uint64_t stream) {
  std::vector<uint64_t> v(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    v[size_t(i)] = uniform_below(90210, RngDomain::kTest, stream, uint32_t(i), q);
  return v;
}

std::vector<uint64_t> ntt_mul(const ckks::NttTables& t, std::vector<uint64_t> a,
                              std::vector<uint64_t> b) {
  t.forward(a.data());
  t.forward(b.data());
  for (size_t i = 0; i < a.size(); ++i) a[i] = ckks::mulmod(a[i], b[i], t.q());
  t.inverse(a.data());
  return a;
}

bool criterion4(std::string& detail) {
  const auto t0 = Clock::now();

  for (int logn : {4, 5}) {
    const uint64_t q = ckks::find_ntt_prime(30, uint64_t(2) << logn, {});
    const ckks::NttTables t(logn, q);
    for (int trial = 0; trial < 300; ++trial) {
      const auto a = random_limb(t.n(), q, uint64_t(4000 * logn + 2 * trial));
      const auto b = random_limb(t.n(), q, uint64_t(4000 * logn + 2 * trial + 1));
      if (ntt_mul(t, a, b) != ckks::negacyclic_mul_reference(a, b, q)) {
        detail = fmt("ntt != schoolbook at N_ct=%d trial %d", 1 << logn, trial);
        return false;
      }
    }
  }

  auto params = ckks::CkksParams::make(13, 3, 30);
  auto ctx = std::make_shared<const ckks::RnsContext>(params);
  ckks::SecretKey sk = ckks::make_secret_key(*ctx, 21);
  auto keys = std::make_shared<const ckks::EvalKeys>(ckks::make_eval_keys(*ctx, sk, 21, {}));
  const ckks::CkksBackend be(ctx, keys, sk);

  const SlotVector v = random_payload(be.slots(), 31);
  const SlotVector w = random_payload(be.slots(), 32);
  const double round_err = max_abs_diff(be.decrypt(be.encrypt(v)), v);
  if (round_err > std::ldexp(1.0, -18)) {
    detail = fmt("roundtrip error %.3e > 2^-18", round_err);
    return false;
  }

  const auto ca = be.encrypt(v);
  const auto cb = be.encrypt(w);
  const SlotVector da = be.decrypt(ca);
  const SlotVector db = be.decrypt(cb);
  SlotVector dsum(da.size());
  for (size_t i = 0; i < da.size(); ++i) dsum[i] = da[i] + db[i];
  const double add_err = max_abs_diff(be.decrypt(be.add_ct(ca, cb)), dsum);
  if (add_err > 1e-10) {
    detail = fmt("addition vs sum of decryptions differs by %.3e > 1e-10", add_err);
    return false;
  }

  // Bitwise serialization across ciphertexts (fresh and rescaled) and keys.
  const ckks::CkksCiphertext ct = ckks::CkksEvaluator::unwrap(ca);
  const auto blob = ckks::serialize_ciphertext(params, ct);
  if (ckks::serialize_ciphertext(params, ckks::parse_ciphertext(params, blob)) != blob) {
    detail = "fresh ciphertext blob does not roundtrip bitwise";
    return false;
  }
  const ckks::CkksCiphertext low = ckks::CkksEvaluator::unwrap(be.mul_pt(ca, w));
  const auto blob_low = ckks::serialize_ciphertext(params, low);
  if (ckks::serialize_ciphertext(params, ckks::parse_ciphertext(params, blob_low)) !=
      blob_low) {
    detail = "rescaled ciphertext blob does not roundtrip bitwise";
    return false;
  }
  const auto skb = ckks::serialize_secret_key(params, sk);
  if (ckks::serialize_secret_key(params, ckks::parse_secret_key(params, skb)) != skb) {
    detail = "secret key blob does not roundtrip bitwise";
    return false;
  }
  const auto rkb = ckks::serialize_relin_key(params, keys->relin);
  if (ckks::serialize_relin_key(params, ckks::parse_relin_key(params, rkb)) != rkb) {
    detail = "relinearization key blob does not roundtrip bitwise";
    return false;
  }

  const double secs = seconds_since(t0);
  detail = fmt("ntt exact at 16/32, roundtrip %.2e <= 2^-18, add %.2e, blobs bitwise, %.1fs",
               round_err, add_err, secs);
  return secs < 60.0;
}

// ---------------------------------------------------------------- 5

ProtocolPlan shipped_plan() {
  const SimConfig cfg = load_config(shipped_config());
  return build_setup(cfg).plan;
}

bool criterion5(std::string& detail) {
  ProtocolPlan plan = shipped_plan();
  const ckks::CkksBackend be = pendulum_ckks_backend(13, 3, 7, 64);
  ProtocolClient client(be, plan);
  ProtocolCloud cloud(be.evaluator(), client.offline(), 4);

  const ErrorBudget prim = calibrate_primitives(be, 20, 5, false, 2.0);
  BudgetDims dims;
  dims.horizon = plan.horizon;
  dims.inputs = plan.inputs;
  dims.rows = plan.rows();
  dims.mag_u = plan.tg.L.cwiseAbs().maxCoeff();
  dims.mag_xi = 8.0;
  const ErrorBudget budget = compute_budget(prim, dims, plan.surrogate);

  const PlantModel model = pendulum_model();
  Vec x = Mat{{0.3}, {0.1}};
  double worst_u = 0.0, worst_s = 0.0;
  for (uint32_t step = 0; step < 100; ++step) {
    const StepOutcome out = client.finalize(cloud.step(client.request(step, x)), x);
    const SampleBatch ref = sample_tilted(plan.tg, x, plan.K, step_seed(plan.seed, step));

    worst_u = std::max(worst_u, (out.U_tilde - ref.U).cwiseAbs().maxCoeff());
    for (int k = 0; k < plan.K; ++k) {
      const double ref_score = surrogate_score(plan.surrogate, ref.g.row(k).transpose());
      worst_s = std::max(worst_s, std::abs(out.scores[k] - ref_score));
    }
    if (worst_u > budget.b_u || worst_s > budget.b_s) {
      detail = fmt("step %u: |U| err %.3e (B^U %.3e), |s| err %.3e (B^s %.3e)",
                   unsigned(step), worst_u, budget.b_u, worst_s, budget.b_s);
      return false;
    }
    x = model.A * x + model.B * out.u;
  }

  detail = fmt("100 steps: max |U| err %.2e <= B^U %.2e, max |s| err %.2e <= B^s %.2e",
               worst_u, budget.b_u, worst_s, budget.b_s);
  return true;
}

// ---------------------------------------------------------------- 6

bool criterion6(std::string& detail) {
  SimConfig cfg = load_config(shipped_config());
  const RunSetup setup = build_setup(cfg);
  if (cfg.problem.N != 10 || cfg.K != 240 || cfg.steps != 40 || setup.lc.p() != 60 ||
      cfg.problem.Q(0, 0) != 50.0 || cfg.problem.R(0, 0) != 0.1 ||
      cfg.sigma0 != 0.0625 || cfg.lambda != 0.1) {
    detail = "shipped config drifted from the published pendulum setup";
    return false;
  }

  const auto runs =
      compare_modes(cfg, {RunMode::kQp, RunMode::kVariational, RunMode::kVempcCkks});
  const TrajectoryLog& qp = runs[0];
  const TrajectoryLog& var = runs[1];
  const TrajectoryLog& enc = runs[2];

  if (qp.violations != 0 || qp.x_final.lpNorm<Eigen::Infinity>() > 0.02) {
    detail = fmt("qp: %d violations, |x(T)| = %.4f", qp.violations,
                 qp.x_final.lpNorm<Eigen::Infinity>());
    return false;
  }
  const double theta_dev = max_state_dev(qp, var, 0);
  if (theta_dev > 0.05 || var.violations != 0) {
    detail = fmt("variational: theta dev %.4f (tol 0.05), %d violations", theta_dev,
                 var.violations);
    return false;
  }
  const double input_dev = max_input_dev(var, enc);
  if (input_dev > 1e-2 || enc.violations != 0) {
    detail = fmt("vempc-ckks: input dev %.2e (tol 1e-2), %d violations", input_dev,
                 enc.violations);
    return false;
  }

  detail = fmt("qp |x(T)| %.4f, variational theta dev %.4f, encrypted input dev %.2e, "
               "violations 0/0/0",
               qp.x_final.lpNorm<Eigen::Infinity>(), theta_dev, input_dev);
  return true;
}

// ---------------------------------------------------------------- 7

bool criterion7(std::string& detail) {
  SimConfig cfg = load_config(shipped_config());
  cfg.steps = 6;
  cfg.workers = 1;

  const auto ell_cells = bench_ablation(cfg, {3, 5}, {13}, {240});
  const auto ring_cells = bench_ablation(cfg, {3}, {14}, {240});
  const auto k_cells = bench_ablation(cfg, {3}, {13}, {32, 64});
  const double base = ell_cells[0].mean_ms;

  if (!(ell_cells[1].mean_ms > base)) {
    detail = fmt("degree 3 -> 5 not increasing: %.1f -> %.1f ms", base,
                 ell_cells[1].mean_ms);
    return false;
  }
  if (!(ring_cells[0].mean_ms > base)) {
    detail = fmt("logN 13 -> 14 not increasing: %.1f -> %.1f ms", base,
                 ring_cells[0].mean_ms);
    return false;
  }
  const double k_change =
      std::abs(k_cells[1].mean_ms - k_cells[0].mean_ms) / k_cells[0].mean_ms;
  if (k_change > 0.25) {
    detail = fmt("K 32 -> 64 inside one block changed mean by %.0f%% > 25%%",
                 100.0 * k_change);
    return false;
  }
  if (base > 2000.0) {
    detail = fmt("online step %.1f ms > 2000 ms at logN 13, degree 3, K 240", base);
    return false;
  }

  detail = fmt("degree %.0f->%.0f ms, logN %.0f->%.0f ms, K-doubling %.1f%%, base <= 2000 ms",
               base, ell_cells[1].mean_ms, base, ring_cells[0].mean_ms, 100.0 * k_change);
  return true;
}

// ---------------------------------------------------------------- 8

template <class T, class = void>
struct ExposesDecrypt : std::false_type {};
template <class T>
struct ExposesDecrypt<T, std::void_t<decltype(std::declval<const T&>().decrypt(
                             std::declval<const HeEvaluator::Ct&>()))>> : std::true_type {};

// The cloud's whole world is HeEvaluator; decryption must not compile there.
static_assert(!ExposesDecrypt<HeEvaluator>::value,
              "evaluation interface must not decrypt");
static_assert(!ExposesDecrypt<ckks::CkksEvaluator>::value,
              "ckks evaluator must not decrypt");
static_assert(ExposesDecrypt<HeBackend>::value, "detector sanity");
static_assert(ExposesDecrypt<ckks::CkksBackend>::value, "detector sanity");
static_assert(std::is_constructible_v<ProtocolCloud, const HeEvaluator&, OfflineBundle, int>,
              "cloud construction requires only the evaluation interface");

bool criterion8(std::string& detail) {
  SimConfig cfg = load_config(shipped_config());
  cfg.steps = 3;
  cfg.K = 64;
  cfg.log2_ring = 12;
  cfg.mode = RunMode::kVempcCkks;
  const TrajectoryLog local = closed_loop_run(cfg);

  const std::string cmd =
      std::string(VEMPC_BINARY_DIR) + "/vempc cloud --listen 127.0.0.1:0 --workers 2";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    detail = "failed to spawn the cloud process";
    return false;
  }
  char line[256];
  unsigned port = 0;
  if (!fgets(line, sizeof(line), pipe) ||
      sscanf(line, "vempc cloud: listening on 127.0.0.1:%u", &port) != 1) {
    pclose(pipe);
    detail = "cloud process did not report a listening port";
    return false;
  }

  const TrajectoryLog remote = run_remote(cfg, "127.0.0.1", uint16_t(port));

  int served = -1;
  if (!fgets(line, sizeof(line), pipe) ||
      sscanf(line, "vempc cloud: served %d requests", &served) != 1)
    served = -1;
  const int rc = pclose(pipe);

  if (rc != 0) {
    detail = fmt("cloud process exited with status %d", rc);
    return false;
  }
  if (served != cfg.steps) {
    detail = fmt("cloud served %d requests for %d steps", served, cfg.steps);
    return false;
  }
  if (remote.steps.size() != local.steps.size()) {
    detail = "remote and local step counts differ";
    return false;
  }
  for (size_t t = 0; t < local.steps.size(); ++t) {
    if (remote.steps[t].u[0] != local.steps[t].u[0] ||
        remote.steps[t].ess != local.steps[t].ess) {
      detail = fmt("step %zu differs between processes", t);
      return false;
    }
  }
  if (remote.x_final != local.x_final) {
    detail = "final states differ between processes";
    return false;
  }

  detail = fmt("one request per step (%d served over %d steps), separate-process run "
               "bitwise equal, evaluator type cannot decrypt",
               served, cfg.steps);
  return true;
}

// ---------------------------------------------------------------- main

struct Criterion {
  int id;
  const char* title;
  bool (*fn)(std::string&);
};

const Criterion kCriteria[] = {
    {1, "condensed cost equals rollout cost", criterion1},
    {2, "tilted estimator closed form", criterion2},
    {3, "surrogate and weighting bounds", criterion3},
    {4, "ckks engine core guarantees", criterion4},
    {5, "error-budget conformance", criterion5},
    {6, "pendulum closed-loop reproduction", criterion6},
    {7, "timing trends", criterion7},
    {8, "protocol structure and key isolation", criterion8},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 2;
    }
  }

  bool all_ok = true;
  for (const Criterion& c : kCriteria) {
    if (only != 0 && c.id != only) continue;
    std::string detail;
    bool ok = false;
    try {
      ok = c.fn(detail);
    } catch (const std::exception& e) {
      detail = e.what();
    }
    std::printf("criterion %d: %s - %s (%s)\n", c.id, ok ? "PASS" : "FAIL", c.title,
                detail.c_str());
    std::fflush(stdout);
    all_ok = all_ok && ok;
  }
  return all_ok ? 0 : 1;
}
