#pragma once

#include "mplex/align.hpp"
#include "mplex/io.hpp"

namespace mplex {

// Model description as read from config files. Block specs are size-free
// (the builders instantiate them at any N, L); table specs pin N and d.
struct ModelConfig {
  enum class Type { smooth_block, discontinuous_block, table };
  Type type = Type::smooth_block;
  int n_nodes = 0;   // default instantiation size; sweeps may override
  int n_layers = 0;
  BlockModelSpec block;
  // table form
  std::vector<double> table_times;
  std::vector<Matrix> table_values;
  Matrix table_layer_positions;  // (N*L) x d
};

ModelConfig parse_model_config(const json& j);
json model_config_to_json(const ModelConfig& config);
LatentModel build_model(const ModelConfig& config, int n_nodes, int n_layers);
inline LatentModel build_model(const ModelConfig& config) {
  return build_model(config, config.n_nodes, config.n_layers);
}

AlignMode parse_align_mode(const std::string& name);

struct SimulateConfig {
  ModelConfig model;
  std::vector<std::uint64_t> seeds;
  std::string format = "csv";  // csv | jsonl | both
};

struct EvaluateConfig {
  ModelConfig model;
  std::vector<int> n_nodes_sweep;
  std::vector<int> n_bins_sweep;
  int n_layers = 0;
  int dim = 2;
  std::vector<std::uint64_t> seeds;
  AlignMode alignment = AlignMode::appendix_w;
  int sup_grid = 10;
};

struct CltConfig {
  ModelConfig model;
  int n_nodes = 0;
  int n_bins = 10;
  int n_layers = 0;
  int dim = 2;
  std::vector<std::uint64_t> seeds;
  bool noiseless = false;
};

SimulateConfig parse_simulate_config(const json& j);
EvaluateConfig parse_evaluate_config(const json& j);
CltConfig parse_clt_config(const json& j);

json load_config_file(const fs::path& path);

}  // namespace mplex
