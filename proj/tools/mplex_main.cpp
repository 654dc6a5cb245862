// Batch front door: simulate | embed | evaluate | clt | cluster.
// Exit codes: 0 ok, 2 config error, 3 model-validity error, 4 data error,
// 5 numerical error.

#include <CLI11.hpp>
#include <cstdio>

#include "mplex/parallel.hpp"
#include "mplex/runner.hpp"

namespace {

using namespace mplex;

int dispatch(const std::string& command, const fs::path& config_path,
             const fs::path& out_dir, int threads, const EmbedArgs& embed_args,
             const ClusterArgs& cluster_args, std::uint64_t seed_override,
             bool have_seed) {
  if (command == "simulate") {
    SimulateConfig config = parse_simulate_config(load_config_file(config_path));
    if (have_seed) config.seeds = {seed_override};
    const RunResult r = run_simulate(config, out_dir, threads);
    std::printf("simulate: wrote %zu file(s) to %s\n", r.outputs.size(),
                out_dir.string().c_str());
    return 0;
  }
  if (command == "embed") {
    const RunResult r = run_embed(embed_args, out_dir);
    std::printf("embed: wrote %zu file(s) to %s\n", r.outputs.size(),
                out_dir.string().c_str());
    return 0;
  }
  if (command == "evaluate") {
    EvaluateConfig config = parse_evaluate_config(load_config_file(config_path));
    if (have_seed) config.seeds = {seed_override};
    const RunResult r = run_evaluate(config, out_dir, threads);
    std::printf("evaluate: %zu output(s), %d failed cell(s)\n", r.outputs.size(),
                r.n_failed_cells);
    return r.n_failed_cells == 0 ? 0 : 5;
  }
  if (command == "clt") {
    CltConfig config = parse_clt_config(load_config_file(config_path));
    if (have_seed) config.seeds = {seed_override};
    const RunResult r = run_clt(config, out_dir, threads);
    std::printf("clt: wrote %zu file(s) to %s\n", r.outputs.size(),
                out_dir.string().c_str());
    return 0;
  }
  if (command == "cluster") {
    const RunResult r = run_cluster(cluster_args, out_dir);
    std::printf("cluster: wrote %zu file(s) to %s\n", r.outputs.size(),
                out_dir.string().c_str());
    return 0;
  }
  throw config_error("unknown command " + command);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multiplex network point-process embedding toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  int threads = mplex::default_thread_count();
  std::uint64_t seed = 0;
  bool have_seed = false;
  app.add_option("--threads", threads, "worker pool size (env MPLEX_THREADS)");
  app.add_option("--out", out_dir, "output directory");

  auto* sim = app.add_subcommand("simulate", "sample event streams from a model config");
  sim->add_option("--config", config_path, "experiment config (JSON)")->required();
  sim->add_option("--seed", seed, "replace the config seed list with one seed")
      ->each([&](const std::string&) { have_seed = true; });

  mplex::EmbedArgs embed_args;
  auto* emb = app.add_subcommand("embed", "bin an event stream and embed it");
  emb->add_option("--events", embed_args.events_path, "event stream (CSV or JSONL)");
  emb->add_option("--matrix", embed_args.container_path, "unfolded-intensity container");
  emb->add_option("--bins", embed_args.n_bins, "number of time bins M");
  emb->add_option("--dim", embed_args.dim, "embedding rank d (omit to pick from the spectrum)");
  emb->add_option("--k-max", embed_args.k_max, "spectrum length for d selection");

  auto* eval = app.add_subcommand("evaluate", "sweep simulate-bin-embed-align cells");
  eval->add_option("--config", config_path, "experiment config (JSON)")->required();
  eval->add_option("--seed", seed, "replace the config seed list with one seed")
      ->each([&](const std::string&) { have_seed = true; });

  auto* clt_cmd = app.add_subcommand("clt", "studentized residual diagnostics");
  clt_cmd->add_option("--config", config_path, "experiment config (JSON)")->required();
  clt_cmd->add_option("--seed", seed, "replace the config seed list with one seed")
      ->each([&](const std::string&) { have_seed = true; });

  mplex::ClusterArgs cluster_args;
  auto* clu = app.add_subcommand("cluster", "normalize, smooth and cluster trajectories");
  clu->add_option("--embedding", cluster_args.embedding_path, "embedding container")
      ->required();
  clu->add_option("--k", cluster_args.k, "cluster count")->required();
  clu->add_option("--window", cluster_args.window, "box smoothing window (odd)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const std::string command = app.get_subcommands().front()->get_name();
    return dispatch(command, config_path, out_dir, threads, embed_args, cluster_args,
                    seed, have_seed);
  } catch (const mplex::config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const mplex::argument_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const mplex::model_validity_error& e) {
    std::fprintf(stderr, "model error: %s\n", e.what());
    return 3;
  } catch (const mplex::data_error& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 4;
  } catch (const mplex::numerical_error& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 5;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
