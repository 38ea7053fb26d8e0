// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "vempc/he_backend.hpp"
#include "vempc/mpc.hpp"
#include "vempc/protocol.hpp"
#include "vempc/transport.hpp"

namespace vempc {

enum class RunMode { kQp, kVariational, kVempcMock, kVempcCkks };

RunMode parse_mode(const std::string& name);
std::string mode_name(RunMode mode);

// Full simulation description; loadable from versioned JSON. `domain <= 0`
// selects the automatic surrogate bound over `box`; `tau_s = NaN` selects the
// default threshold p * delta_ell.
struct SimConfig {
  PlantModel model;
  MpcProblem problem;

  double sigma0 = 1.0;  // Sigma0 = sigma0 * I
  double lambda = 1.0;
  int K = 1;
  uint64_t seed = 0;

  int degree = 3;
  double domain = 0.0;
  Vec box;

  double tau_s = std::numeric_limits<double>::quiet_NaN();
  double eta = 1e3;

  int log2_ring = 13;
  int log2_scale = 30;
  int depth = 3;
  NoiseModel mock_noise;

  int steps = 1;
  Vec x0;
  RunMode mode = RunMode::kQp;
  int workers = 1;  // VEMPC_WORKERS overrides

  void validate() const;
};

SimConfig parse_config(const std::string& text);
SimConfig load_config(const std::string& path);
std::string config_echo(const SimConfig& cfg);  // JSON with defaults filled

// Derived run-time objects shared by every mode.
struct RunSetup {
  CondensedQp qp;
  LinearConstraints lc;
  ProtocolPlan plan;
};
RunSetup build_setup(const SimConfig& cfg);

struct StepLog {
  int t = 0;
  Vec x;  // state measured at t, before applying u
  Vec u;
  double client_ms = 0.0;
  double cloud_ms = 0.0;
  double total_ms = 0.0;
  double ess = 0.0;
  double max_score = 0.0;
  double margin = 0.0;  // realized bound excess at t+1; negative means safe
  bool fallback = false;
};

struct TrajectoryLog {
  RunMode mode = RunMode::kQp;
  std::vector<StepLog> steps;
  Vec x_final;
  double online_mean_ms = 0.0;  // over steps 1..T-1; step 0 is warm-up
  double online_std_ms = 0.0;
  int violations = 0;
  int fallbacks = 0;
};

TrajectoryLog closed_loop_run(const SimConfig& cfg);

// Paired-seed runs of the listed modes on one config.
std::vector<TrajectoryLog> compare_modes(const SimConfig& cfg,
                                         const std::vector<RunMode>& modes);

double max_state_dev(const TrajectoryLog& a, const TrajectoryLog& b, int coord);
double max_input_dev(const TrajectoryLog& a, const TrajectoryLog& b);

struct BenchCell {
  int degree = 0;
  int log2_ring = 0;
  int K = 0;
  int workers = 0;
  double mean_ms = 0.0;
  double std_ms = 0.0;
};

// Sequential grid of encrypted closed loops; depth follows the cell degree.
std::vector<BenchCell> bench_ablation(const SimConfig& cfg,
                                      const std::vector<int>& degrees,
                                      const std::vector<int>& log2_rings,
                                      const std::vector<int>& Ks);

void emit_csv(const TrajectoryLog& log, const std::string& path);
TrajectoryLog parse_csv(const std::string& path);
void emit_compare_csv(const std::vector<TrajectoryLog>& runs, const std::string& path);
void emit_bench_csv(const std::vector<BenchCell>& cells, const std::string& path);

// Two-process transport. The server accepts one client, rebuilds the
// evaluator from the setup frame (never any secret key), serves request
// frames until a bye frame, and returns. The client drives the same closed
// loop as `closed_loop_run` against the remote cloud.
int serve_session(Socket& sock, int workers);  // returns requests served
void serve_cloud(uint16_t port, int workers);
TrajectoryLog run_remote(const SimConfig& cfg, const std::string& host, uint16_t port);

// Key and cache artifacts for the keygen/offline subcommands; `run` and the
// remote modes regenerate the same material deterministically from the seed.
void write_keys(const SimConfig& cfg, const std::string& dir);
void write_offline_cache(const SimConfig& cfg, const std::string& keys_dir,
                         const std::string& cache_dir);

}  // namespace vempc
