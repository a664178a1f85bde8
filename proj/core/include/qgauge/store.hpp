#pragma once

#include <array>
#include <filesystem>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "qgauge/records.hpp"
#include "qgauge/snapshot.hpp"
#include "qgauge/time.hpp"

namespace qgauge {

struct AppendResult {
  std::size_t inserted = 0;
  std::size_t duplicates = 0;

  bool operator==(const AppendResult&) const = default;
};

/// Append-only store: one line-delimited JSON file per stratum (raw, metrics,
/// factors, aspects) plus alerts.jsonl and manifest.json. Lines are never
/// rewritten. The whole store is indexed in memory on open.
///
/// One writer per directory (flock on `.lock`), any number of readers. Within
/// a process, writes are serialized and readers always see a consistent
/// prefix.
class Store {
 public:
  enum class Mode { read_write, read_only };

  static constexpr int kFormatVersion = 1;
  static constexpr std::string_view kRawFile = "raw.jsonl";
  static constexpr std::string_view kMetricsFile = "metrics.jsonl";
  static constexpr std::string_view kFactorsFile = "factors.jsonl";
  static constexpr std::string_view kAspectsFile = "aspects.jsonl";
  static constexpr std::string_view kAlertsFile = "alerts.jsonl";
  static constexpr std::string_view kManifestFile = "manifest.json";

  /// Creates the directory and manifest when opened read-write for the first
  /// time. Throws StoreError.
  explicit Store(std::filesystem::path directory, Mode mode = Mode::read_write,
                 std::string project = "default");
  ~Store();

  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  /// Records whose record_id is already stored are skipped and counted as
  /// duplicates. The batch is written with a single write. Throws RecordError
  /// (nothing written) when any record breaks an invariant.
  AppendResult append(std::span<const RawRecord> records);

  /// Records of `kind` with window.from <= timestamp < window.to, ordered by
  /// (timestamp, record_id).
  std::vector<RawRecord> query_raw(SourceKind kind, TimeWindow window) const;
  std::size_t raw_count() const;

  /// Persists the snapshot, assigning an id when it has none. Returns the id.
  std::string save_snapshot(const Snapshot& snapshot);

  /// Snapshots with evaluated_at inside the window, ordered by evaluated_at
  /// (ties in save order).
  std::vector<Snapshot> query_snapshots(TimeWindow window) const;
  /// Most recently saved snapshot.
  std::optional<Snapshot> latest_snapshot() const;
  std::optional<Snapshot> find_snapshot(std::string_view snapshot_id) const;
  std::vector<SeriesPoint> element_series(std::string_view element_id, TimeWindow window) const;
  std::size_t snapshot_count() const;

  /// Alerts whose id is already stored are ignored. Returns how many were new.
  std::size_t append_alerts(std::span<const Alert> alerts);
  /// Alerts evaluated at or after `since`, in insertion order.
  std::vector<Alert> query_alerts(std::optional<Instant> since = std::nullopt) const;
  /// false when the id is unknown. Idempotent.
  bool acknowledge_alert(std::string_view alert_id);

  const std::filesystem::path& directory() const { return directory_; }
  const std::string& project() const { return project_; }
  Mode mode() const { return mode_; }

 private:
  struct StoredSnapshot {
    std::uint64_t seq = 0;
    Snapshot snapshot;
  };

  void load();
  void load_raw();
  void load_snapshots();
  void load_alerts();
  void require_writable() const;
  void append_lines(std::string_view file, const std::string& bytes);
  std::vector<std::string> read_lines(std::string_view file);

  std::filesystem::path directory_;
  Mode mode_;
  std::string project_;
  int lock_fd_ = -1;

  mutable std::shared_mutex data_mutex_;
  std::mutex writer_mutex_;

  std::array<std::vector<RawRecord>, 7> raw_by_kind_;
  std::unordered_set<std::string> record_ids_;
  std::vector<StoredSnapshot> snapshots_;
  std::uint64_t next_seq_ = 0;
  std::vector<Alert> alerts_;
  std::unordered_map<std::string, std::size_t> alert_index_;
};

}  // namespace qgauge
