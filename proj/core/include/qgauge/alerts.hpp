#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qgauge/model.hpp"
#include "qgauge/snapshot.hpp"

namespace qgauge {

class AlertError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One alert per element whose color got strictly worse since `prev`; with
/// no `prev`, one per element already orange or red. Alert ids derive from
/// (snapshot_id, element_id), so replays produce the same ids. Throws
/// AlertError when the snapshots cover different element sets.
std::vector<Alert> detect_alerts(const std::optional<Snapshot>& prev, const Snapshot& curr,
                                 const QualityModel& model);

/// Like detect_alerts, but elements missing from `prev` follow the first
/// assessment rule instead of failing. Used across model replacements.
std::vector<Alert> detect_alerts_lenient(const std::optional<Snapshot>& prev, const Snapshot& curr,
                                         const QualityModel& model);

struct DrilldownNode {
  std::string element_id;
  Stratum stratum = Stratum::aspect;
  std::optional<double> value;
  Color color = Color::no_data;
  /// Edge weight from the parent; 1 at the root.
  double weight_from_parent = 1.0;
  /// Weight after renormalizing over siblings with data; 0 for no-data.
  double renormalized_weight = 1.0;
  /// weight_from_parent * value, 0 for no-data.
  double contribution = 0.0;
  /// Worst first; no-data last; ties by element id.
  std::vector<DrilldownNode> children;
  std::vector<Offender> offenders;
  RawSummary raw_summary;
  std::size_t n_entities = 0;
};

/// Subtree from `element_id` down to the metric leaves. Throws AlertError for
/// elements missing from the model or the snapshot.
DrilldownNode drilldown(const Snapshot& snapshot, const std::string& element_id, const QualityModel& model);

nlohmann::json drilldown_to_json(const DrilldownNode& node);

}  // namespace qgauge
