#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "mplex/align.hpp"
#include "mplex/clt.hpp"
#include "mplex/cluster.hpp"

namespace mplex {

namespace fs = std::filesystem;
using json = nlohmann::json;

// Doubles are written with 17 significant digits so text round trips are
// value-exact.
std::string format_double(double value);

// --- event streams ---------------------------------------------------------
void write_events_csv(const EventStream& stream, const fs::path& path);
void write_events_jsonl(const EventStream& stream, const fs::path& path);
// Throws data_error listing offending line numbers on malformed rows.
EventStream read_events_csv(const fs::path& path);
EventStream read_events_jsonl(const fs::path& path);

// --- flat binary container --------------------------------------------------
// Layout: magic "MPLXBIN1", u32 version, u32 kind, u64 n_nodes/n_bins/
// n_layers, u64 section count, then per section u64 rows, u64 cols and a
// row-major little-endian f64 payload.
enum class ContainerKind : std::uint32_t {
  unfolded_empirical = 0,
  unfolded_exact_mean = 1,
  embedding = 2,
  distance_matrix = 3,
};

struct Container {
  ContainerKind kind = ContainerKind::unfolded_empirical;
  std::uint64_t n_nodes = 0, n_bins = 0, n_layers = 0;
  std::vector<Matrix> sections;
};

void write_container(const Container& container, const fs::path& path);
Container read_container(const fs::path& path);

Container to_container(const UnfoldedIntensity& unfolded);
UnfoldedIntensity unfolded_from_container(const Container& container);
Container to_container(const Embedding& embedding);
Embedding embedding_from_container(const Container& container);

// --- matrix exports ---------------------------------------------------------
void write_matrix_market(const Matrix& matrix, const fs::path& path);
void write_matrix_csv(const Matrix& matrix, const fs::path& path,
                      const std::string& header = "");
Matrix read_matrix_csv(const fs::path& path, bool expect_header);

// --- structured reports ------------------------------------------------------
json to_json(const AlignmentReport& report);
json to_json(const AssumptionDiagnostics& diagnostics);
json to_json(const NormalityReport& report);
json to_json(const SpectrumReport& report);
json to_json(const LipschitzLadder& ladder);
void write_json(const json& value, const fs::path& path);
json read_json(const fs::path& path);

// FNV-1a over bytes; manifests use it to tie outputs to configs.
std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64_file(const fs::path& path);
std::string hash_hex(std::uint64_t hash);

}  // namespace mplex
