#pragma once

#include "mplex/config.hpp"

namespace mplex {

// Batch drivers behind the CLI subcommands. Every driver writes its primary
// outputs plus a manifest tying them to the generating config; outputs are
// byte-stable for a fixed (config, seed) at any thread count.

struct RunResult {
  int n_failed_cells = 0;
  std::vector<fs::path> outputs;
};

RunResult run_simulate(const SimulateConfig& config, const fs::path& out_dir,
                       int n_threads);

struct EmbedArgs {
  fs::path events_path;     // CSV/JSONL stream, or
  fs::path container_path;  // unfolded-intensity container
  int n_bins = 0;           // required with events input
  int dim = 0;              // 0: choose from the spectrum
  int k_max = 30;
};

RunResult run_embed(const EmbedArgs& args, const fs::path& out_dir);

RunResult run_evaluate(const EvaluateConfig& config, const fs::path& out_dir,
                       int n_threads);

RunResult run_clt(const CltConfig& config, const fs::path& out_dir, int n_threads);

struct ClusterArgs {
  fs::path embedding_path;  // embedding container
  int k = 1;
  int window = 5;
};

RunResult run_cluster(const ClusterArgs& args, const fs::path& out_dir);

// Tidy per-cell evaluation record (one CSV row).
struct EvalCell {
  int n_nodes = 0;
  int n_bins = 0;
  int n_layers = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  double err_x = 0.0, err_y = 0.0, err_x_continuous = 0.0, err_x_bias = 0.0;
  double sigma_d = 0.0, sigma_d_plus_1 = 0.0;
};

}  // namespace mplex
