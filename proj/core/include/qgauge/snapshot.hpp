#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qgauge/time.hpp"
#include "qgauge/types.hpp"

namespace qgauge {

/// Actual (un-normalized) values and counts behind a normalized value.
using RawSummary = std::map<std::string, double>;

/// An entity dragging a metric down: a file, a test run, an issue, a log line.
struct Offender {
  std::string entity;
  double base_value = 0.0;
  double utility = 0.0;

  bool operator==(const Offender&) const = default;
};

struct SnapshotEntry {
  Stratum stratum = Stratum::metric;
  std::optional<double> value;
  Color color = Color::no_data;
  RawSummary raw_summary;
  /// Metric entries only.
  std::size_t n_entities = 0;
  std::vector<Offender> offenders;

  bool operator==(const SnapshotEntry&) const = default;
};

struct Snapshot {
  std::string snapshot_id;
  Instant evaluated_at;
  TimeWindow window;
  std::map<std::string, SnapshotEntry> entries;
  /// What-if results; never persisted.
  bool transient = false;

  bool operator==(const Snapshot&) const = default;

  const SnapshotEntry* find(const std::string& id) const;
};

/// Value-level equality: ignores snapshot_id, evaluated_at and transient.
bool same_values(const Snapshot& a, const Snapshot& b);

struct SeriesPoint {
  Instant evaluated_at;
  std::string snapshot_id;
  std::optional<double> value;
  Color color = Color::no_data;

  bool operator==(const SeriesPoint&) const = default;
};

enum class ThresholdCrossed { warning, critical };

struct Alert {
  std::string alert_id;
  std::string element_id;
  Stratum stratum = Stratum::aspect;
  /// Absent for the bootstrap alerts of a first assessment.
  std::optional<Color> previous_color;
  Color new_color = Color::orange;
  double value = 0.0;
  ThresholdCrossed threshold_crossed = ThresholdCrossed::warning;
  Instant evaluated_at;
  std::string snapshot_id;
  bool acknowledged = false;

  bool operator==(const Alert&) const = default;
};

std::string_view to_string(ThresholdCrossed t);

nlohmann::json entry_to_json(const SnapshotEntry& e);
SnapshotEntry entry_from_json(const nlohmann::json& j);
nlohmann::json snapshot_to_json(const Snapshot& s);
Snapshot snapshot_from_json(const nlohmann::json& j);
nlohmann::json series_to_json(const std::string& element_id, const std::vector<SeriesPoint>& points);
nlohmann::json alert_to_json(const Alert& a);
Alert alert_from_json(const nlohmann::json& j);

/// null for no-data.
nlohmann::json value_to_json(const std::optional<double>& v);

}  // namespace qgauge
