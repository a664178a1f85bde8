#include "support/fixtures.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "qgauge/ingestion.hpp"

namespace qgauge::testing {

fs::path fixture_path(std::string_view name) { return fs::path(QGAUGE_FIXTURE_DIR) / name; }

fs::path source_path(std::string_view relative) { return fs::path(QGAUGE_SOURCE_DIR) / relative; }

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const fs::path& path, std::string_view text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

TempDir::TempDir() {
  std::string pattern = (fs::temp_directory_path() / "qgauge-test-XXXXXX").string();
  if (!mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::map<std::string, std::string> directory_bytes(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) out[fs::relative(entry.path(), dir).string()] = read_text(entry.path());
  }
  return out;
}

Instant at(std::string_view iso) {
  auto t = parse_instant(iso);
  if (!t) throw std::invalid_argument("bad instant " + std::string(iso));
  return *t;
}

QualityModel demo_model() { return parse_model(read_text(source_path("models/demo-model.json"))); }

TimeWindow demo_window(int k) {
  return k == 1 ? TimeWindow{at("2018-01-01"), at("2018-01-15")} : TimeWindow{at("2018-01-15"), at("2018-01-29")};
}

void ingest_demo_window(Store& store, int k) {
  const fs::path dir = source_path("data/demo") / ("window" + std::to_string(k));
  const std::pair<const char*, InputFormat> inputs[] = {
      {"static.json", InputFormat::static_analysis}, {"commits.log", InputFormat::commits},
      {"junit.xml", InputFormat::testxml},           {"issues.csv", InputFormat::issues},
      {"app.log", InputFormat::logs},                {"records.jsonl", InputFormat::records},
  };
  for (const auto& [file, format] : inputs) {
    IngestContext ctx;
    ctx.default_timestamp = demo_window(k).from;
    const ParseResult parsed = parse_input(format, read_text(dir / file), ctx);
    if (!parsed.warnings.empty()) throw std::runtime_error(std::string("warnings parsing demo ") + file);
    store.append(parsed.records);
  }
}

}  // namespace qgauge::testing
