#include "mplex/runner.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "mplex/parallel.hpp"

namespace mplex {

namespace {

std::string config_hash(const json& j) {
  const std::string canonical = j.dump();
  return hash_hex(fnv1a64(canonical.data(), canonical.size()));
}

void write_manifest(const fs::path& out_dir, const std::string& command,
                    const json& config, const std::vector<fs::path>& outputs,
                    json extra = json::object()) {
  json manifest;
  manifest["command"] = command;
  manifest["config"] = config;
  manifest["config_hash"] = config_hash(config);
  json files = json::array();
  for (const fs::path& p : outputs)
    files.push_back({{"path", p.filename().string()},
                     {"bytes", fs::file_size(p)},
                     {"fnv1a64", hash_hex(fnv1a64_file(p))}});
  manifest["outputs"] = std::move(files);
  for (auto& [key, value] : extra.items()) manifest[key] = value;
  write_json(manifest, out_dir / (command + "_manifest.json"));
}

double median(std::vector<double> values) {
  if (values.empty()) throw argument_error("median: empty");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

RunResult run_simulate(const SimulateConfig& config, const fs::path& out_dir,
                       int n_threads) {
  fs::create_directories(out_dir);
  const LatentModel model = build_model(config.model);
  RunResult result;
  json counts = json::array();
  for (std::uint64_t seed : config.seeds) {
    const EventStream stream = sample_events(model, seed, n_threads);
    const std::string stem = "events_seed" + std::to_string(seed);
    if (config.format == "csv" || config.format == "both") {
      const fs::path path = out_dir / (stem + ".csv");
      write_events_csv(stream, path);
      result.outputs.push_back(path);
    }
    if (config.format == "jsonl" || config.format == "both") {
      const fs::path path = out_dir / (stem + ".jsonl");
      write_events_jsonl(stream, path);
      result.outputs.push_back(path);
    }
    std::vector<long> per_layer(model.n_layers(), 0);
    for (const Event& e : stream.events) ++per_layer[e.layer];
    counts.push_back({{"seed", seed},
                      {"n_events", stream.events.size()},
                      {"per_layer", per_layer}});
  }
  json extra;
  extra["counts"] = std::move(counts);
  extra["model_hash"] = config_hash(model_config_to_json(config.model));
  write_manifest(out_dir, "simulate",
                 json{{"model", model_config_to_json(config.model)},
                      {"seeds", config.seeds},
                      {"format", config.format}},
                 result.outputs, std::move(extra));
  return result;
}

RunResult run_embed(const EmbedArgs& args, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  UnfoldedIntensity unfolded;
  json extra;
  if (!args.events_path.empty()) {
    if (args.n_bins < 1) throw config_error("embed: events input needs --bins");
    EventStream stream = args.events_path.extension() == ".jsonl"
                             ? read_events_jsonl(args.events_path)
                             : read_events_csv(args.events_path);
    std::vector<double> times(stream.events.size());
    for (std::size_t k = 0; k < times.size(); ++k) times[k] = stream.events[k].time;
    const TimeNormalization norm = normalize_times(times);
    if (norm.applied) {
      for (std::size_t k = 0; k < times.size(); ++k) stream.events[k].time = times[k];
      extra["time_normalization"] = {{"t_min", norm.t_min}, {"t_max", norm.t_max}};
    }
    unfolded = bin_events(stream, args.n_bins);
  } else if (!args.container_path.empty()) {
    unfolded = unfolded_from_container(read_container(args.container_path));
  } else {
    throw config_error("embed: need an events file or a matrix container");
  }

  RunResult result;
  int dim = args.dim;
  const int k_max = std::min<int>(
      {args.k_max, int(unfolded.data.rows()), int(unfolded.data.cols())});
  const SpectrumReport spectrum = select_dimension(unfolded.data, k_max);
  if (dim < 1) dim = spectrum.chosen_d;
  const Embedding embedding = duase(unfolded, dim);

  const fs::path left_csv = out_dir / "embedding_x.csv";
  const fs::path right_csv = out_dir / "embedding_y.csv";
  const fs::path container = out_dir / "embedding.bin";
  const fs::path spectrum_json = out_dir / "spectrum.json";
  write_matrix_csv(embedding.left, left_csv);
  write_matrix_csv(embedding.right, right_csv);
  write_container(to_container(embedding), container);
  write_json(to_json(spectrum), spectrum_json);
  result.outputs = {left_csv, right_csv, container, spectrum_json};
  extra["dim"] = dim;
  write_manifest(out_dir, "embed",
                 json{{"events", args.events_path.string()},
                      {"container", args.container_path.string()},
                      {"n_bins", args.n_bins},
                      {"dim_requested", args.dim}},
                 result.outputs, std::move(extra));
  return result;
}

RunResult run_evaluate(const EvaluateConfig& config, const fs::path& out_dir,
                       int n_threads) {
  fs::create_directories(out_dir);

  struct Shared {
    LatentModel model;
    GroundTruth truth;
  };
  // Ground truth per (N, M) is shared across seeds; build it up front.
  std::map<std::pair<int, int>, std::shared_ptr<Shared>> shared;
  std::map<int, std::shared_ptr<LatentModel>> models;
  for (int n : config.n_nodes_sweep)
    models.emplace(n, std::make_shared<LatentModel>(
                          build_model(config.model, n, config.n_layers)));
  for (int n : config.n_nodes_sweep)
    for (int m : config.n_bins_sweep) {
      auto entry = std::make_shared<Shared>(Shared{*models.at(n), {}});
      entry->truth = make_ground_truth(entry->model, m, config.dim);
      shared.emplace(std::make_pair(n, m), std::move(entry));
    }

  std::vector<EvalCell> cells;
  for (int n : config.n_nodes_sweep)
    for (int m : config.n_bins_sweep)
      for (std::uint64_t seed : config.seeds) {
        EvalCell cell;
        cell.n_nodes = n;
        cell.n_bins = m;
        cell.n_layers = config.n_layers;
        cell.seed = seed;
        cells.push_back(std::move(cell));
      }

  parallel_for(int(cells.size()), n_threads, [&](int idx) {
    EvalCell& cell = cells[idx];
    try {
      const auto& entry = *shared.at({cell.n_nodes, cell.n_bins});
      const UnfoldedIntensity lam_hat =
          sample_binned(entry.model, cell.seed, cell.n_bins, 1);
      // One extra triplet so the eigengap column comes from the same
      // decomposition.
      const int rank = std::min<int>(config.dim + 1, int(lam_hat.data.cols()));
      const SvdResult svd = truncated_svd(lam_hat.data, rank);
      const Embedding embedding = embedding_from_svd(svd, cell.n_nodes, cell.n_bins,
                                                     cell.n_layers, config.dim);
      const AlignmentReport report =
          recovery_error(embedding, entry.truth, config.alignment, config.sup_grid);
      cell.err_x = report.err_x;
      cell.err_y = report.err_y;
      cell.err_x_continuous = report.err_x_continuous;
      cell.err_x_bias = report.err_x_bias;
      cell.sigma_d = svd.sigma(config.dim - 1);
      cell.sigma_d_plus_1 = svd.sigma(rank - 1);
    } catch (const std::exception& e) {
      cell.failed = true;
      cell.error = e.what();
    }
  });

  RunResult result;
  const fs::path cells_csv = out_dir / "evaluate_cells.csv";
  {
    // deterministic row order: the construction order (N, M, seed)
    std::string text = "n_nodes,n_bins,n_layers,seed,err_x,err_y,err_x_continuous,"
                       "err_x_bias,sigma_d,sigma_d_plus_1,failed\n";
    for (const EvalCell& c : cells) {
      text += std::to_string(c.n_nodes) + "," + std::to_string(c.n_bins) + "," +
              std::to_string(c.n_layers) + "," + std::to_string(c.seed) + "," +
              format_double(c.err_x) + "," + format_double(c.err_y) + "," +
              format_double(c.err_x_continuous) + "," + format_double(c.err_x_bias) + "," +
              format_double(c.sigma_d) + "," + format_double(c.sigma_d_plus_1) + "," +
              (c.failed ? "1" : "0") + "\n";
    }
    fs::create_directories(cells_csv.parent_path());
    std::FILE* f = std::fopen(cells_csv.c_str(), "w");
    if (!f) throw data_error("run_evaluate: cannot open " + cells_csv.string());
    std::fwrite(text.data(), 1, text.size(), f);
    std::fclose(f);
  }
  result.outputs.push_back(cells_csv);

  // Rate fits: medians over seeds, slope of error against N at fixed M.
  json fits = json::object();
  for (int m : config.n_bins_sweep) {
    std::vector<double> ns, med_x, med_y;
    for (int n : config.n_nodes_sweep) {
      std::vector<double> ex, ey;
      for (const EvalCell& c : cells)
        if (!c.failed && c.n_nodes == n && c.n_bins == m) {
          ex.push_back(c.err_x);
          ey.push_back(c.err_y);
        }
      if (ex.empty()) continue;
      ns.push_back(n);
      med_x.push_back(median(ex));
      med_y.push_back(median(ey));
    }
    if (ns.size() >= 2) {
      const RateFit fx = fit_log_log(ns, med_x);
      const RateFit fy = fit_log_log(ns, med_y);
      fits["M=" + std::to_string(m)] = {
          {"n_nodes", ns},
          {"median_err_x", med_x},
          {"median_err_y", med_y},
          {"x_slope", fx.slope},
          {"x_r_squared", fx.r_squared},
          {"y_slope", fy.slope},
          {"y_r_squared", fy.r_squared}};
    }
  }
  const fs::path fits_json = out_dir / "rate_fits.json";
  write_json(fits, fits_json);
  result.outputs.push_back(fits_json);

  RunResult final = std::move(result);
  for (const EvalCell& c : cells)
    if (c.failed) ++final.n_failed_cells;
  json cfg{{"model", model_config_to_json(config.model)},
           {"n_nodes", config.n_nodes_sweep},
           {"n_bins", config.n_bins_sweep},
           {"n_layers", config.n_layers},
           {"dim", config.dim},
           {"seeds", config.seeds},
           {"sup_grid", config.sup_grid}};
  json extra;
  extra["n_failed_cells"] = final.n_failed_cells;
  write_manifest(out_dir, "evaluate", cfg, final.outputs, std::move(extra));
  return final;
}

RunResult run_clt(const CltConfig& config, const fs::path& out_dir, int n_threads) {
  fs::create_directories(out_dir);
  const LatentModel model = build_model(config.model, config.n_nodes, config.n_layers);
  const GroundTruth truth = make_ground_truth(model, config.n_bins, config.dim);

  struct SeedOut {
    Matrix z_x, z_y;
  };
  std::vector<SeedOut> outs(config.seeds.size());
  parallel_for(int(config.seeds.size()), n_threads, [&](int idx) {
    const std::uint64_t seed = config.seeds[idx];
    const UnfoldedIntensity lam = config.noiseless
                                      ? truth.lambda_bar
                                      : sample_binned(model, seed, config.n_bins, 1);
    const Embedding embedding = duase(lam, config.dim);
    const AlignmentReport alignment =
        recovery_error(embedding, truth, AlignMode::appendix_w);
    outs[idx].z_x = studentize(embedding, truth, alignment, Side::left_x).z;
    outs[idx].z_y = studentize(embedding, truth, alignment, Side::right_y).z;
  });

  const int d = config.dim;
  auto pool = [&](auto select) {
    Eigen::Index rows = 0;
    for (const auto& o : outs) rows += select(o).rows();
    Matrix z(rows, d);
    Eigen::Index at = 0;
    for (const auto& o : outs) {
      z.middleRows(at, select(o).rows()) = select(o);
      at += select(o).rows();
    }
    return z;
  };
  StudentizedResiduals pooled_x;
  pooled_x.z = pool([](const SeedOut& o) -> const Matrix& { return o.z_x; });
  pooled_x.side = Side::left_x;
  StudentizedResiduals pooled_y;
  pooled_y.z = pool([](const SeedOut& o) -> const Matrix& { return o.z_y; });
  pooled_y.side = Side::right_y;

  RunResult result;
  // Residual CSV: index columns + z columns, X side rows then Y side rows.
  const fs::path residuals_csv = out_dir / "residuals.csv";
  {
    std::string text = "side,seed,block,node";
    for (int k = 0; k < d; ++k) text += ",z" + std::to_string(k + 1);
    text += "\n";
    for (std::size_t s = 0; s < config.seeds.size(); ++s) {
      const auto emit = [&](const Matrix& z, const char* side) {
        const int n = config.n_nodes;
        for (Eigen::Index r = 0; r < z.rows(); ++r) {
          text += std::string(side) + "," + std::to_string(config.seeds[s]) + "," +
                  std::to_string(r / n) + "," + std::to_string(r % n);
          for (int k = 0; k < d; ++k) text += "," + format_double(z(r, k));
          text += "\n";
        }
      };
      emit(outs[s].z_x, "x");
      emit(outs[s].z_y, "y");
    }
    std::FILE* f = std::fopen(residuals_csv.c_str(), "w");
    if (!f) throw data_error("run_clt: cannot open " + residuals_csv.string());
    std::fwrite(text.data(), 1, text.size(), f);
    std::fclose(f);
  }
  result.outputs.push_back(residuals_csv);

  json report;
  report["x_side"] = to_json(normality_report(pooled_x));
  report["y_side"] = to_json(normality_report(pooled_y));
  const fs::path report_json = out_dir / "normality.json";
  write_json(report, report_json);
  result.outputs.push_back(report_json);

  write_manifest(out_dir, "clt",
                 json{{"model", model_config_to_json(config.model)},
                      {"n_nodes", config.n_nodes},
                      {"n_bins", config.n_bins},
                      {"n_layers", config.n_layers},
                      {"dim", config.dim},
                      {"seeds", config.seeds},
                      {"noiseless", config.noiseless}},
                 result.outputs);
  return result;
}

RunResult run_cluster(const ClusterArgs& args, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const Embedding embedding = embedding_from_container(read_container(args.embedding_path));
  const TrajectoryMatrix trajectories = normalize_and_smooth(embedding, args.window);
  const Matrix distances = trajectory_distances(trajectories);
  const ClusterResult clusters = agglomerative_cluster(distances, args.k);

  RunResult result;
  const fs::path labels_csv = out_dir / "labels.csv";
  {
    std::string text = "node,label\n";
    for (std::size_t i = 0; i < clusters.labels.size(); ++i)
      text += std::to_string(i) + "," + std::to_string(clusters.labels[i]) + "\n";
    std::FILE* f = std::fopen(labels_csv.c_str(), "w");
    if (!f) throw data_error("run_cluster: cannot open " + labels_csv.string());
    std::fwrite(text.data(), 1, text.size(), f);
    std::fclose(f);
  }
  const fs::path merges_csv = out_dir / "merges.csv";
  {
    std::string text = "left,right,into,height\n";
    for (const MergeStep& m : clusters.merges)
      text += std::to_string(m.left) + "," + std::to_string(m.right) + "," +
              std::to_string(m.into) + "," + format_double(m.height) + "\n";
    std::FILE* f = std::fopen(merges_csv.c_str(), "w");
    if (!f) throw data_error("run_cluster: cannot open " + merges_csv.string());
    std::fwrite(text.data(), 1, text.size(), f);
    std::fclose(f);
  }
  Container dist_container;
  dist_container.kind = ContainerKind::distance_matrix;
  dist_container.n_nodes = embedding.n_nodes;
  dist_container.n_bins = embedding.n_bins;
  dist_container.n_layers = embedding.n_layers;
  dist_container.sections = {distances};
  const fs::path dist_bin = out_dir / "distances.bin";
  write_container(dist_container, dist_bin);

  result.outputs = {labels_csv, merges_csv, dist_bin};
  write_manifest(out_dir, "cluster",
                 json{{"embedding", args.embedding_path.string()},
                      {"k", args.k},
                      {"window", args.window}},
                 result.outputs);
  return result;
}

}  // namespace mplex
