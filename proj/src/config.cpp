#include "mplex/config.hpp"

#include <algorithm>
#include <set>

namespace mplex {

namespace {

[[noreturn]] void bad(const std::string& msg) { throw config_error("config: " + msg); }

template <typename T>
T require(const json& j, const char* key) {
  if (!j.contains(key)) bad(std::string("missing key `") + key + "`");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    bad(std::string("key `") + key + "` has the wrong type");
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    bad(std::string("key `") + key + "` has the wrong type");
  }
}

Matrix parse_matrix(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) bad(std::string(what) + " must be a nonempty array of rows");
  const std::size_t cols = j.front().size();
  Matrix out(j.size(), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) bad(std::string(what) + " has ragged rows");
    for (std::size_t c = 0; c < cols; ++c) out(i, c) = j[i][c].get<double>();
  }
  return out;
}

std::vector<std::uint64_t> parse_seeds(const json& j) {
  auto seeds = require<std::vector<std::uint64_t>>(j, "seeds");
  if (seeds.empty()) bad("seed list is empty");
  std::set<std::uint64_t> unique(seeds.begin(), seeds.end());
  if (unique.size() != seeds.size()) bad("seeds must be distinct");
  return seeds;
}

}  // namespace

ModelConfig parse_model_config(const json& j) {
  ModelConfig config;
  const auto type = require<std::string>(j, "type");
  if (type == "smooth_block") config.type = ModelConfig::Type::smooth_block;
  else if (type == "discontinuous_block") config.type = ModelConfig::Type::discontinuous_block;
  else if (type == "table") config.type = ModelConfig::Type::table;
  else bad("unknown model type `" + type + "`");

  config.n_nodes = get_or<int>(j, "n_nodes", 0);
  config.n_layers = get_or<int>(j, "n_layers", 0);

  if (config.type == ModelConfig::Type::table) {
    const json& table = j.contains("table") ? j.at("table") : json::object();
    config.table_times = require<std::vector<double>>(table, "times");
    if (!table.contains("values") || !table.at("values").is_array())
      bad("table model needs `values` (one matrix per knot)");
    for (const json& v : table.at("values"))
      config.table_values.push_back(parse_matrix(v, "table values"));
    config.table_layer_positions =
        parse_matrix(require<json>(table, "layer_positions"), "layer_positions");
    if (config.n_nodes == 0 && !config.table_values.empty())
      config.n_nodes = int(config.table_values.front().rows());
    return config;
  }

  const json& b = j.contains("block") ? j.at("block") : json::object();
  BlockModelSpec& spec = config.block;
  spec.n_groups_dynamic = require<int>(b, "n_groups_dynamic");
  spec.n_groups_layer = require<int>(b, "n_groups_layer");
  spec.group_fractions = get_or<std::vector<double>>(b, "group_fractions", {});
  spec.layer_group_fractions = get_or<std::vector<double>>(b, "layer_group_fractions", {});
  spec.group_of_node = get_or<std::vector<int>>(b, "group_of_node", {});
  spec.layer_group_of_node =
      get_or<std::vector<std::vector<int>>>(b, "layer_group_of_node", {});

  if (!b.contains("dynamic_params") || !b.at("dynamic_params").is_array())
    bad("block model needs `dynamic_params`");
  for (const json& p : b.at("dynamic_params")) {
    DynamicGroupParams gp;
    gp.c1 = require<double>(p, "c1");
    gp.c2 = require<double>(p, "c2");
    gp.radius = require<double>(p, "radius");
    gp.phase = require<double>(p, "phase");
    spec.dynamic_params.push_back(gp);
  }
  if (!b.contains("layer_params") || !b.at("layer_params").is_array())
    bad("block model needs `layer_params` (per layer, per group)");
  for (const json& layer : b.at("layer_params")) {
    std::vector<LayerGroupParams> row;
    for (const json& p : layer) {
      LayerGroupParams gp;
      gp.offset = require<double>(p, "offset");
      gp.angle = require<double>(p, "angle");
      row.push_back(gp);
    }
    spec.layer_params.push_back(std::move(row));
  }
  if (b.contains("discontinuity")) {
    const json& dsc = b.at("discontinuity");
    StepSpec step;
    const auto tau = require<std::vector<double>>(dsc, "tau");
    if (tau.size() != 3) bad("discontinuity needs exactly three breakpoints");
    std::copy(tau.begin(), tau.end(), step.tau.begin());
    const auto mult = get_or<std::vector<double>>(dsc, "multipliers",
                                                  {0.0, 0.4, -0.3, 0.7});
    if (mult.size() != 4) bad("discontinuity needs four level multipliers");
    std::copy(mult.begin(), mult.end(), step.multipliers.begin());
    spec.discontinuity = step;
  }
  if (config.type == ModelConfig::Type::discontinuous_block && !spec.discontinuity)
    bad("discontinuous_block model needs a `discontinuity` table");
  if (config.type == ModelConfig::Type::smooth_block && spec.discontinuity)
    bad("smooth_block model must not carry a `discontinuity` table");
  return config;
}

json model_config_to_json(const ModelConfig& config) {
  json j;
  switch (config.type) {
    case ModelConfig::Type::smooth_block: j["type"] = "smooth_block"; break;
    case ModelConfig::Type::discontinuous_block: j["type"] = "discontinuous_block"; break;
    case ModelConfig::Type::table: j["type"] = "table"; break;
  }
  if (config.n_nodes > 0) j["n_nodes"] = config.n_nodes;
  if (config.n_layers > 0) j["n_layers"] = config.n_layers;
  if (config.type == ModelConfig::Type::table) {
    json values = json::array();
    for (const Matrix& v : config.table_values) {
      json rows = json::array();
      for (Eigen::Index i = 0; i < v.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index c = 0; c < v.cols(); ++c) row.push_back(v(i, c));
        rows.push_back(std::move(row));
      }
      values.push_back(std::move(rows));
    }
    json positions = json::array();
    for (Eigen::Index i = 0; i < config.table_layer_positions.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index c = 0; c < config.table_layer_positions.cols(); ++c)
        row.push_back(config.table_layer_positions(i, c));
      positions.push_back(std::move(row));
    }
    j["table"] = {{"times", config.table_times},
                  {"values", std::move(values)},
                  {"layer_positions", std::move(positions)}};
    return j;
  }
  const BlockModelSpec& spec = config.block;
  json b;
  b["n_groups_dynamic"] = spec.n_groups_dynamic;
  b["n_groups_layer"] = spec.n_groups_layer;
  if (!spec.group_fractions.empty()) b["group_fractions"] = spec.group_fractions;
  if (!spec.layer_group_fractions.empty())
    b["layer_group_fractions"] = spec.layer_group_fractions;
  if (!spec.group_of_node.empty()) b["group_of_node"] = spec.group_of_node;
  if (!spec.layer_group_of_node.empty()) b["layer_group_of_node"] = spec.layer_group_of_node;
  json dyn = json::array();
  for (const auto& p : spec.dynamic_params)
    dyn.push_back({{"c1", p.c1}, {"c2", p.c2}, {"radius", p.radius}, {"phase", p.phase}});
  b["dynamic_params"] = std::move(dyn);
  json layers = json::array();
  for (const auto& layer : spec.layer_params) {
    json row = json::array();
    for (const auto& p : layer) row.push_back({{"offset", p.offset}, {"angle", p.angle}});
    layers.push_back(std::move(row));
  }
  b["layer_params"] = std::move(layers);
  if (spec.discontinuity) {
    b["discontinuity"] = {
        {"tau", std::vector<double>(spec.discontinuity->tau.begin(),
                                    spec.discontinuity->tau.end())},
        {"multipliers", std::vector<double>(spec.discontinuity->multipliers.begin(),
                                            spec.discontinuity->multipliers.end())}};
  }
  j["block"] = std::move(b);
  return j;
}

LatentModel build_model(const ModelConfig& config, int n_nodes, int n_layers) {
  switch (config.type) {
    case ModelConfig::Type::smooth_block:
      return build_smooth_block_model(config.block, n_nodes, n_layers);
    case ModelConfig::Type::discontinuous_block:
      return build_discontinuous_block_model(config.block, n_nodes, n_layers);
    case ModelConfig::Type::table: {
      if (n_nodes != int(config.table_values.front().rows()))
        throw config_error("config: table model is pinned to its own node count");
      auto trajectory =
          std::make_shared<TableTrajectory>(config.table_times, config.table_values);
      return LatentModel(trajectory, config.table_layer_positions, n_layers);
    }
  }
  throw config_error("config: unreachable model type");
}

AlignMode parse_align_mode(const std::string& name) {
  if (name == "procrustes-global") return AlignMode::procrustes_global;
  if (name == "procrustes-per-bin") return AlignMode::procrustes_per_bin;
  if (name == "appendix-w") return AlignMode::appendix_w;
  bad("unknown alignment mode `" + name + "`");
}

SimulateConfig parse_simulate_config(const json& j) {
  SimulateConfig config;
  config.model = parse_model_config(require<json>(j, "model"));
  if (config.model.n_nodes < 1 || config.model.n_layers < 1)
    bad("simulate: model needs n_nodes and n_layers");
  config.seeds = parse_seeds(j);
  config.format = get_or<std::string>(j, "format", "csv");
  if (config.format != "csv" && config.format != "jsonl" && config.format != "both")
    bad("simulate: format must be csv, jsonl or both");
  return config;
}

EvaluateConfig parse_evaluate_config(const json& j) {
  EvaluateConfig config;
  config.model = parse_model_config(require<json>(j, "model"));
  config.n_nodes_sweep = require<std::vector<int>>(j, "n_nodes");
  config.n_bins_sweep = require<std::vector<int>>(j, "n_bins");
  if (config.n_nodes_sweep.empty() || config.n_bins_sweep.empty())
    bad("evaluate: sweep lists must be nonempty");
  config.n_layers = get_or<int>(j, "n_layers", config.model.n_layers);
  if (config.n_layers < 1) bad("evaluate: needs n_layers");
  config.dim = get_or<int>(j, "dim", 2);
  config.seeds = parse_seeds(j);
  config.alignment = parse_align_mode(get_or<std::string>(j, "alignment", "appendix-w"));
  config.sup_grid = get_or<int>(j, "sup_grid", 10);
  return config;
}

CltConfig parse_clt_config(const json& j) {
  CltConfig config;
  config.model = parse_model_config(require<json>(j, "model"));
  config.n_nodes = get_or<int>(j, "n_nodes", config.model.n_nodes);
  config.n_layers = get_or<int>(j, "n_layers", config.model.n_layers);
  config.n_bins = require<int>(j, "n_bins");
  config.dim = get_or<int>(j, "dim", 2);
  if (config.n_nodes < 1 || config.n_layers < 1 || config.n_bins < 1)
    bad("clt: needs n_nodes, n_layers, n_bins");
  config.noiseless = get_or<bool>(j, "noiseless", false);
  config.seeds = parse_seeds(j);
  return config;
}

json load_config_file(const fs::path& path) {
  if (!fs::exists(path)) throw config_error("config: file does not exist: " + path.string());
  try {
    return read_json(path);
  } catch (const data_error& e) {
    throw config_error(e.what());
  }
}

}  // namespace mplex
