#include "mplex/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

namespace mplex {

namespace {

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

[[noreturn]] void fail_open(const fs::path& path, const char* what) {
  throw data_error(std::string(what) + ": cannot open " + path.string());
}

struct FileCloser {
  void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

File open_write(const fs::path& path, const char* what, bool binary = false) {
  ensure_parent(path);
  File f(std::fopen(path.c_str(), binary ? "wb" : "w"));
  if (!f) fail_open(path, what);
  return f;
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

// ---------------------------------------------------------------------------
// event streams

void write_events_csv(const EventStream& stream, const fs::path& path) {
  File f = open_write(path, "write_events_csv");
  std::fputs("src,dst,layer,time\n", f.get());
  for (const Event& e : stream.events)
    std::fprintf(f.get(), "%d,%d,%d,%s\n", e.src, e.dst, e.layer,
                 format_double(e.time).c_str());
}

void write_events_jsonl(const EventStream& stream, const fs::path& path) {
  File f = open_write(path, "write_events_jsonl");
  for (const Event& e : stream.events)
    std::fprintf(f.get(), "{\"src\":%d,\"dst\":%d,\"layer\":%d,\"time\":%s}\n", e.src,
                 e.dst, e.layer, format_double(e.time).c_str());
}

namespace {

EventStream finalize_stream(std::vector<Event> events) {
  EventStream stream;
  stream.events = std::move(events);
  int max_node = -1, max_layer = -1;
  for (const Event& e : stream.events) {
    max_node = std::max({max_node, e.src, e.dst});
    max_layer = std::max(max_layer, e.layer);
  }
  stream.n_nodes = max_node + 1;
  stream.n_layers = max_layer + 1;
  return stream;
}

[[noreturn]] void report_bad_lines(const char* what, const std::vector<long>& lines) {
  std::string msg = std::string(what) + ": malformed rows at line";
  msg += lines.size() > 1 ? "s " : " ";
  for (std::size_t i = 0; i < lines.size() && i < 20; ++i) {
    if (i) msg += ", ";
    msg += std::to_string(lines[i]);
  }
  if (lines.size() > 20) msg += ", ...";
  throw data_error(msg);
}

}  // namespace

EventStream read_events_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail_open(path, "read_events_csv");
  std::string line;
  if (!std::getline(in, line) || line.rfind("src,dst,layer,time", 0) != 0)
    throw data_error("read_events_csv: missing `src,dst,layer,time` header in " +
                     path.string());
  std::vector<Event> events;
  std::vector<long> bad;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Event e;
    char* cursor = line.data();
    char* end = nullptr;
    auto parse_int = [&](std::int32_t& out) {
      const long v = std::strtol(cursor, &end, 10);
      const bool ok = end != cursor && *end == ',';
      out = std::int32_t(v);
      cursor = ok ? end + 1 : cursor;
      return ok;
    };
    bool ok = parse_int(e.src) && parse_int(e.dst) && parse_int(e.layer);
    if (ok) {
      e.time = std::strtod(cursor, &end);
      ok = end != cursor && *end == '\0';
    }
    if (!ok || e.src < 0 || e.dst < 0 || e.layer < 0) {
      bad.push_back(line_no);
      continue;
    }
    events.push_back(e);
  }
  if (!bad.empty()) report_bad_lines("read_events_csv", bad);
  return finalize_stream(std::move(events));
}

EventStream read_events_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail_open(path, "read_events_jsonl");
  std::vector<Event> events;
  std::vector<long> bad;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("src") || !j.contains("dst") ||
        !j.contains("layer") || !j.contains("time")) {
      bad.push_back(line_no);
      continue;
    }
    events.push_back(Event{j["src"].get<std::int32_t>(), j["dst"].get<std::int32_t>(),
                           j["layer"].get<std::int32_t>(), j["time"].get<double>()});
  }
  if (!bad.empty()) report_bad_lines("read_events_jsonl", bad);
  return finalize_stream(std::move(events));
}

// ---------------------------------------------------------------------------
// binary container

namespace {

constexpr char kMagic[8] = {'M', 'P', 'L', 'X', 'B', 'I', 'N', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_raw(std::FILE* f, const T& value) {
  std::fwrite(&value, sizeof(T), 1, f);
}

template <typename T>
T read_raw(std::FILE* f, const fs::path& path) {
  T value{};
  if (std::fread(&value, sizeof(T), 1, f) != 1)
    throw data_error("read_container: truncated file " + path.string());
  return value;
}

}  // namespace

void write_container(const Container& container, const fs::path& path) {
  File f = open_write(path, "write_container", true);
  std::fwrite(kMagic, 1, sizeof kMagic, f.get());
  write_raw(f.get(), kVersion);
  write_raw(f.get(), static_cast<std::uint32_t>(container.kind));
  write_raw(f.get(), container.n_nodes);
  write_raw(f.get(), container.n_bins);
  write_raw(f.get(), container.n_layers);
  write_raw(f.get(), std::uint64_t(container.sections.size()));
  for (const Matrix& section : container.sections) {
    write_raw(f.get(), std::uint64_t(section.rows()));
    write_raw(f.get(), std::uint64_t(section.cols()));
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const RowMajor buffer = section;
    std::fwrite(buffer.data(), sizeof(double), std::size_t(buffer.size()), f.get());
  }
}

Container read_container(const fs::path& path) {
  File f(std::fopen(path.c_str(), "rb"));
  if (!f) fail_open(path, "read_container");
  char magic[8];
  if (std::fread(magic, 1, sizeof magic, f.get()) != sizeof magic ||
      std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw data_error("read_container: bad magic in " + path.string());
  const auto version = read_raw<std::uint32_t>(f.get(), path);
  if (version != kVersion)
    throw data_error("read_container: unsupported version " + std::to_string(version));
  Container container;
  container.kind = static_cast<ContainerKind>(read_raw<std::uint32_t>(f.get(), path));
  container.n_nodes = read_raw<std::uint64_t>(f.get(), path);
  container.n_bins = read_raw<std::uint64_t>(f.get(), path);
  container.n_layers = read_raw<std::uint64_t>(f.get(), path);
  const auto n_sections = read_raw<std::uint64_t>(f.get(), path);
  for (std::uint64_t s = 0; s < n_sections; ++s) {
    const auto rows = read_raw<std::uint64_t>(f.get(), path);
    const auto cols = read_raw<std::uint64_t>(f.get(), path);
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    RowMajor buffer(rows, cols);
    if (std::fread(buffer.data(), sizeof(double), std::size_t(buffer.size()), f.get()) !=
        std::size_t(buffer.size()))
      throw data_error("read_container: truncated payload in " + path.string());
    container.sections.emplace_back(buffer);
  }
  return container;
}

Container to_container(const UnfoldedIntensity& unfolded) {
  Container c;
  c.kind = unfolded.kind == IntensityKind::empirical ? ContainerKind::unfolded_empirical
                                                     : ContainerKind::unfolded_exact_mean;
  c.n_nodes = unfolded.n_nodes;
  c.n_bins = unfolded.n_bins;
  c.n_layers = unfolded.n_layers;
  c.sections = {unfolded.data};
  return c;
}

UnfoldedIntensity unfolded_from_container(const Container& container) {
  if (container.sections.size() != 1 ||
      (container.kind != ContainerKind::unfolded_empirical &&
       container.kind != ContainerKind::unfolded_exact_mean))
    throw data_error("unfolded_from_container: not an unfolded-intensity container");
  UnfoldedIntensity out;
  out.data = container.sections[0];
  out.n_nodes = int(container.n_nodes);
  out.n_bins = int(container.n_bins);
  out.n_layers = int(container.n_layers);
  out.kind = container.kind == ContainerKind::unfolded_empirical
                 ? IntensityKind::empirical
                 : IntensityKind::exact_mean;
  if (out.data.rows() != Eigen::Index(out.n_nodes) * out.n_bins ||
      out.data.cols() != Eigen::Index(out.n_nodes) * out.n_layers)
    throw data_error("unfolded_from_container: inconsistent shape metadata");
  return out;
}

Container to_container(const Embedding& embedding) {
  Container c;
  c.kind = ContainerKind::embedding;
  c.n_nodes = embedding.n_nodes;
  c.n_bins = embedding.n_bins;
  c.n_layers = embedding.n_layers;
  c.sections = {embedding.left, embedding.right, embedding.singular_values.transpose()};
  return c;
}

Embedding embedding_from_container(const Container& container) {
  if (container.kind != ContainerKind::embedding || container.sections.size() != 3)
    throw data_error("embedding_from_container: not an embedding container");
  Embedding out;
  out.left = container.sections[0];
  out.right = container.sections[1];
  out.singular_values = container.sections[2].row(0).transpose();
  out.n_nodes = int(container.n_nodes);
  out.n_bins = int(container.n_bins);
  out.n_layers = int(container.n_layers);
  out.dim = int(out.left.cols());
  if (out.left.rows() != Eigen::Index(out.n_nodes) * out.n_bins ||
      out.right.rows() != Eigen::Index(out.n_nodes) * out.n_layers ||
      out.right.cols() != out.dim || out.singular_values.size() != out.dim)
    throw data_error("embedding_from_container: inconsistent shape metadata");
  return out;
}

// ---------------------------------------------------------------------------
// matrix exports

void write_matrix_market(const Matrix& matrix, const fs::path& path) {
  File f = open_write(path, "write_matrix_market");
  std::fputs("%%MatrixMarket matrix array real general\n", f.get());
  std::fprintf(f.get(), "%" PRId64 " %" PRId64 "\n", std::int64_t(matrix.rows()),
               std::int64_t(matrix.cols()));
  // array format is column-major
  for (Eigen::Index j = 0; j < matrix.cols(); ++j)
    for (Eigen::Index i = 0; i < matrix.rows(); ++i)
      std::fprintf(f.get(), "%s\n", format_double(matrix(i, j)).c_str());
}

void write_matrix_csv(const Matrix& matrix, const fs::path& path, const std::string& header) {
  File f = open_write(path, "write_matrix_csv");
  if (!header.empty()) std::fprintf(f.get(), "%s\n", header.c_str());
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      if (j) std::fputc(',', f.get());
      std::fputs(format_double(matrix(i, j)).c_str(), f.get());
    }
    std::fputc('\n', f.get());
  }
}

Matrix read_matrix_csv(const fs::path& path, bool expect_header) {
  std::ifstream in(path);
  if (!in) fail_open(path, "read_matrix_csv");
  std::string line;
  if (expect_header && !std::getline(in, line))
    throw data_error("read_matrix_csv: empty file " + path.string());
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    const char* cursor = line.c_str();
    char* end = nullptr;
    for (;;) {
      row.push_back(std::strtod(cursor, &end));
      if (end == cursor)
        throw data_error("read_matrix_csv: malformed row in " + path.string());
      if (*end == '\0') break;
      if (*end != ',')
        throw data_error("read_matrix_csv: malformed row in " + path.string());
      cursor = end + 1;
    }
    if (!rows.empty() && rows.front().size() != row.size())
      throw data_error("read_matrix_csv: ragged rows in " + path.string());
    rows.push_back(std::move(row));
  }
  Matrix out(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) out(i, j) = rows[i][j];
  return out;
}

// ---------------------------------------------------------------------------
// structured reports

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

const char* mode_name(AlignMode mode) {
  switch (mode) {
    case AlignMode::procrustes_global: return "procrustes-global";
    case AlignMode::procrustes_per_bin: return "procrustes-per-bin";
    case AlignMode::appendix_w: return "appendix-w";
  }
  return "unknown";
}

}  // namespace

json to_json(const AlignmentReport& report) {
  return json{{"mode", mode_name(report.mode)},
              {"errors",
               {{"x_two_to_inf", report.err_x},
                {"y_two_to_inf", report.err_y},
                {"x_continuous_two_to_inf", report.err_x_continuous},
                {"x_bias_two_to_inf", report.err_x_bias}}},
              {"sup_grid", report.sup_grid},
              {"procrustes_degenerate", report.procrustes_degenerate},
              {"W", matrix_to_json(report.W)},
              {"W_X", matrix_to_json(report.W_X)},
              {"W_Y", matrix_to_json(report.W_Y)}};
}

json to_json(const AssumptionDiagnostics& diagnostics) {
  return json{{"moment_x", matrix_to_json(diagnostics.moment_x)},
              {"moment_y", matrix_to_json(diagnostics.moment_y)},
              {"condition_number_x", diagnostics.kappa_x},
              {"condition_number_y", diagnostics.kappa_y},
              {"incoherence_x", diagnostics.mu_x},
              {"incoherence_y", diagnostics.mu_y},
              {"lipschitz_x", diagnostics.lipschitz_x},
              {"lipschitz_subspace", diagnostics.lipschitz_subspace},
              {"lipschitz_coordinate", diagnostics.lipschitz_coord},
              {"grid", diagnostics.grid},
              {"projector_degenerate", diagnostics.projector_degenerate}};
}

json to_json(const NormalityReport& report) {
  return json{{"coverage_95", vector_to_json(report.coverage)},
              {"pooled_covariance", matrix_to_json(report.pooled_covariance)},
              {"max_abs_deviation_from_identity", report.max_abs_deviation},
              {"chi_squared_ks", report.chi_squared_ks},
              {"degenerate", report.degenerate},
              {"n_rows", report.n_rows}};
}

json to_json(const SpectrumReport& report) {
  return json{{"leading_singular_values", vector_to_json(report.leading_singular_values)},
              {"gap_ratios", report.gap_ratios},
              {"chosen_d", report.chosen_d},
              {"flat_warning", report.flat_warning}};
}

json to_json(const LipschitzLadder& ladder) {
  return json{{"grids", ladder.grids},
              {"estimates", ladder.estimates},
              {"growth", ladder.growth},
              {"violation", ladder.violation}};
}

void write_json(const json& value, const fs::path& path) {
  File f = open_write(path, "write_json");
  const std::string text = value.dump(2);
  std::fwrite(text.data(), 1, text.size(), f.get());
  std::fputc('\n', f.get());
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail_open(path, "read_json");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw data_error("read_json: invalid JSON in " + path.string());
  return j;
}

// ---------------------------------------------------------------------------
// hashing

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= bytes[i];
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::uint64_t fnv1a64_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_open(path, "fnv1a64_file");
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char buffer[1 << 16];
  while (in.read(buffer, sizeof buffer) || in.gcount() > 0) {
    const auto got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buffer[i]);
      hash *= 0x100000001b3ULL;
    }
  }
  return hash;
}

std::string hash_hex(std::uint64_t hash) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, hash);
  return buf;
}

}  // namespace mplex
