#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "qgauge/model.hpp"
#include "qgauge/store.hpp"
#include "qgauge/time.hpp"

namespace qgauge::testing {

namespace fs = std::filesystem;

fs::path fixture_path(std::string_view name);
fs::path source_path(std::string_view relative);
std::string read_text(const fs::path& path);
void write_text(const fs::path& path, std::string_view text);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(std::string_view name) const { return path_ / name; }

 private:
  fs::path path_;
};

/// Relative path -> file bytes, for every regular file below `dir`.
std::map<std::string, std::string> directory_bytes(const fs::path& dir);

Instant at(std::string_view iso);

QualityModel demo_model();
/// Windows of the two-window demo scenario (1 or 2).
TimeWindow demo_window(int k);
/// Ingests every demo source file of window `k` into the store.
void ingest_demo_window(Store& store, int k);

}  // namespace qgauge::testing
