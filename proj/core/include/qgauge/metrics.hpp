#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qgauge/model.hpp"
#include "qgauge/records.hpp"
#include "qgauge/snapshot.hpp"
#include "qgauge/time.hpp"

namespace qgauge {

/// Normalized assessed metric plus the actual values behind it.
struct MetricValue {
  std::string metric_id;
  std::optional<double> value;
  std::size_t n_entities = 0;
  RawSummary raw_summary;
  /// Entities with utility < 1, lowest utility first, capped at `top_n`.
  std::vector<Offender> offenders;

  bool operator==(const MetricValue&) const = default;
};

/// One scored entity of an entity-based metric.
struct EntityScore {
  std::string entity;
  double base_value = 0.0;
  double utility = 0.0;
};

/// Raw records a metric needs for `window`: issue metrics look at every
/// version up to window.to (state as of the window end), everything else at
/// the window itself.
TimeWindow record_query_window(const MetricDef& def, TimeWindow window);

/// Effective window of a metric for a request window: a metric with its own
/// window_days looks back that many days from window.to.
TimeWindow effective_window(const MetricDef& def, TimeWindow request);

/// Computes any catalog metric. `records` may contain other kinds and
/// out-of-window records; they are filtered here. Throws std::invalid_argument
/// for unknown extractors or missing params.
MetricValue compute_assessed_metric(const MetricDef& def, std::span<const RawRecord> records,
                                    TimeWindow window);

/// 1 - open bugs / issues, over the latest version of each issue created or
/// updated in the window.
MetricValue compute_non_bug_density(std::span<const RawRecord> issues, TimeWindow window,
                                    const std::vector<std::string>& open_statuses = {"open", "in_progress"});

/// Proportion of touched files changed by fewer than `change_limit` commits.
MetricValue compute_highly_changed(std::span<const RawRecord> commits, TimeWindow window,
                                   double change_limit);

MetricValue compute_availability(std::span<const RawRecord> samples, TimeWindow window,
                                 double floor_pct, double goal_pct);

/// Latest version (by `updated`, then record_id) of each issue among records
/// with timestamp < `as_of`.
std::vector<const RawRecord*> latest_issue_versions(std::span<const RawRecord> issues, Instant as_of);

/// Mean of entity utilities; no-data when empty.
std::optional<double> mean_utility(std::span<const EntityScore> scores);

/// Entities with utility < 1, ascending by utility, at most `top_n`. Ties go
/// to the larger base value, then to the entity name.
std::vector<Offender> select_offenders(std::vector<EntityScore> scores, std::size_t top_n);

}  // namespace qgauge
