// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "vempc/harness.hpp"

namespace {

using namespace vempc;

std::vector<int> int_list(const std::string& text, const std::string& flag) {
  std::vector<int> out;
  std::string cur;
  for (char c : text + ",") {
    if (c != ',') {
      cur += c;
      continue;
    }
    if (cur.empty()) continue;
    char* end = nullptr;
    const long v = std::strtol(cur.c_str(), &end, 10);
    if (end == cur.c_str() || *end != '\0' || v < 1)
      throw ConfigError("config: " + flag + " must be a comma-separated list of positive integers");
    out.push_back(int(v));
    cur.clear();
  }
  if (out.empty())
    throw ConfigError("config: " + flag + " must be a comma-separated list of positive integers");
  return out;
}

std::pair<std::string, uint16_t> parse_addr(const std::string& addr) {
  const size_t colon = addr.rfind(':');
  const std::string host = colon == std::string::npos ? "" : addr.substr(0, colon);
  const std::string port_str = colon == std::string::npos ? addr : addr.substr(colon + 1);
  char* end = nullptr;
  const long port = std::strtol(port_str.c_str(), &end, 10);
  if (end == port_str.c_str() || *end != '\0' || port < 0 || port > 65535)
    throw ConfigError("config: address must be [host:]port");
  return {host.empty() ? std::string("127.0.0.1") : host, uint16_t(port)};
}

void print_summary(const TrajectoryLog& log) {
  const double final_inf = log.x_final.size() ? log.x_final.cwiseAbs().maxCoeff() : 0.0;
  std::printf("%s: steps=%zu online_ms=%.3f+/-%.3f violations=%d fallbacks=%d |x(T)|inf=%.6g\n",
              mode_name(log.mode).c_str(), log.steps.size(), log.online_mean_ms,
              log.online_std_ms, log.violations, log.fallbacks, final_inf);
}

int run_cli(int argc, char** argv) {
  CLI::App app{"variational encrypted MPC"};
  app.require_subcommand(1);

  std::string config_path, out_path, keys_dir, cache_dir;
  std::string mode_str, modes_csv = "qp,variational,vempc-ckks";
  std::string degrees_csv = "3,5", logn_csv = "13,14", ks_csv;
  std::string addr = "127.0.0.1:0";
  uint64_t seed = 0;
  int workers = 0;

  CLI::App* keygen = app.add_subcommand("keygen", "write key blobs for the configured parameters");
  keygen->add_option("--params", config_path, "config file")->required();
  keygen->add_option("--out", keys_dir, "output directory")->required();

  CLI::App* offline = app.add_subcommand("offline", "encrypt the offline bundle");
  offline->add_option("--config", config_path, "config file")->required();
  offline->add_option("--keys", keys_dir, "key directory from keygen")->required();
  offline->add_option("--cache", cache_dir, "output directory")->required();

  CLI::App* run = app.add_subcommand("run", "closed-loop simulation");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--mode", mode_str, "qp|variational|vempc-mock|vempc-ckks");
  CLI::Option* seed_opt = run->add_option("--seed", seed, "sampling and key seed");
  CLI::Option* workers_opt = run->add_option("--workers", workers, "cloud worker threads");
  run->add_option("--out", out_path, "trajectory csv");

  CLI::App* bench = app.add_subcommand("bench", "timing ablation grid");
  bench->add_option("--config", config_path, "config file")->required();
  bench->add_option("--degrees", degrees_csv, "surrogate degrees");
  bench->add_option("--logn", logn_csv, "ring sizes (log2)");
  bench->add_option("--ks", ks_csv, "sample counts (default: config K)");
  bench->add_option("--out", out_path, "bench csv");

  CLI::App* compare = app.add_subcommand("compare", "paired-seed mode comparison");
  compare->add_option("--config", config_path, "config file")->required();
  compare->add_option("--modes", modes_csv, "comma-separated mode list");
  compare->add_option("--out", out_path, "comparison csv");

  CLI::App* cloud = app.add_subcommand("cloud", "serve one evaluation session");
  cloud->add_option("--listen", addr, "[host:]port, port 0 picks one");
  CLI::Option* cloud_workers = cloud->add_option("--workers", workers, "cloud worker threads");

  CLI::App* client = app.add_subcommand("client", "drive a closed loop against a remote cloud");
  client->add_option("--connect", addr, "host:port")->required();
  client->add_option("--config", config_path, "config file")->required();
  client->add_option("--mode", mode_str, "vempc-mock|vempc-ckks");
  client->add_option("--out", out_path, "trajectory csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (*keygen) {
    const SimConfig cfg = load_config(config_path);
    write_keys(cfg, keys_dir);
    std::printf("keygen: wrote secret/public/relin/rotation keys to %s\n", keys_dir.c_str());
    return 0;
  }

  if (*offline) {
    const SimConfig cfg = load_config(config_path);
    write_offline_cache(cfg, keys_dir, cache_dir);
    std::printf("offline: wrote %s/bundle.bin\n", cache_dir.c_str());
    return 0;
  }

  if (*run) {
    SimConfig cfg = load_config(config_path);
    if (!mode_str.empty()) cfg.mode = parse_mode(mode_str);
    if (seed_opt->count() > 0) cfg.seed = seed;
    if (workers_opt->count() > 0) cfg.workers = workers;
    const TrajectoryLog log = closed_loop_run(cfg);
    if (!out_path.empty()) emit_csv(log, out_path);
    print_summary(log);
    return 0;
  }

  if (*bench) {
    const SimConfig cfg = load_config(config_path);
    const std::vector<int> ks =
        ks_csv.empty() ? std::vector<int>{cfg.K} : int_list(ks_csv, "--ks");
    const std::vector<BenchCell> cells = bench_ablation(
        cfg, int_list(degrees_csv, "--degrees"), int_list(logn_csv, "--logn"), ks);
    if (!out_path.empty()) emit_bench_csv(cells, out_path);
    for (const BenchCell& c : cells)
      std::printf("degree=%d log2_ring=%d K=%d workers=%d mean_ms=%.3f std_ms=%.3f\n",
                  c.degree, c.log2_ring, c.K, c.workers, c.mean_ms, c.std_ms);
    return 0;
  }

  if (*compare) {
    const SimConfig cfg = load_config(config_path);
    std::vector<RunMode> modes;
    std::string cur;
    for (char c : modes_csv + ",") {
      if (c != ',') {
        cur += c;
        continue;
      }
      if (!cur.empty()) modes.push_back(parse_mode(cur));
      cur.clear();
    }
    const std::vector<TrajectoryLog> runs = compare_modes(cfg, modes);
    if (!out_path.empty()) emit_compare_csv(runs, out_path);
    for (const TrajectoryLog& log : runs) print_summary(log);
    for (size_t i = 1; i < runs.size(); ++i)
      std::printf("deviation %s vs %s: max_u=%.6g max_theta=%.6g\n",
                  mode_name(runs[i].mode).c_str(), mode_name(runs[0].mode).c_str(),
                  max_input_dev(runs[0], runs[i]), max_state_dev(runs[0], runs[i], 0));
    return 0;
  }

  if (*cloud) {
    const auto [host, port] = parse_addr(addr);
    if (host != "127.0.0.1" && host != "localhost")
      throw ConfigError("config: the cloud listens on 127.0.0.1 only");
    serve_cloud(port, cloud_workers->count() > 0 ? workers : 1);
    return 0;
  }

  if (*client) {
    SimConfig cfg = load_config(config_path);
    if (!mode_str.empty()) cfg.mode = parse_mode(mode_str);
    const auto [host, port] = parse_addr(addr);
    const TrajectoryLog log = run_remote(cfg, host, port);
    if (!out_path.empty()) emit_csv(log, out_path);
    print_summary(log);
    return 0;
  }

  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const vempc::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const vempc::NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
