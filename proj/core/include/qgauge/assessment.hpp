#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qgauge/metrics.hpp"
#include "qgauge/model.hpp"
#include "qgauge/snapshot.hpp"
#include "qgauge/store.hpp"

namespace qgauge {

struct ChildValue {
  std::optional<double> value;
  double weight = 0.0;
};

/// Weighted mean over the children that carry data, with their weights
/// renormalized to sum to 1. No-data when no child has data.
std::optional<double> aggregate_children(std::span<const ChildValue> children);

enum class Trigger { manual, scheduled };

struct AssessmentRequest {
  TimeWindow window;
  Trigger trigger = Trigger::manual;

  /// [now - days, now)
  static AssessmentRequest trailing(Instant now, int days, Trigger trigger = Trigger::manual);
};

/// Model overrides for a what-if run. Params are merged into the metric's
/// existing params; everything else replaces.
struct WhatIfDelta {
  std::vector<Edge> weights;
  std::map<std::string, UtilityFunction> utilities;
  std::map<std::string, Thresholds> thresholds;
  std::map<std::string, Params> params;

  bool empty() const;
};

/// {"weights": [{"parent","child","weight"}], "utilities": {id: utility},
///  "thresholds": {id: {...}}, "params": {id: {...}}}. Throws ModelError.
WhatIfDelta delta_from_json(const nlohmann::json& j);
nlohmann::json delta_to_json(const WhatIfDelta& d);

/// Throws ModelError for unknown elements or edges and ValidationError when
/// the result is not a valid model.
QualityModel apply_delta(const QualityModel& model, const WhatIfDelta& delta);

/// Factors and aspects from already computed metric values, colored.
Snapshot assemble_snapshot(const QualityModel& model, const std::map<std::string, MetricValue>& metrics,
                           TimeWindow window, Instant evaluated_at);

/// All metrics over their effective windows from `store`, then the upper
/// strata. Pure: nothing is written.
Snapshot evaluate(const QualityModel& model, const Store& store, TimeWindow window, Instant evaluated_at);

/// Same as `evaluate` over an in-memory record set.
Snapshot evaluate_records(const QualityModel& model, std::span<const RawRecord> records,
                          TimeWindow window, Instant evaluated_at);

class AssessmentBusy : public std::runtime_error {
 public:
  AssessmentBusy() : std::runtime_error("assessment already running") {}
};

struct AssessmentResult {
  Snapshot snapshot;
  std::vector<Alert> alerts;
};

/// Owns the current model and the single-flight assessment pipeline over one
/// store.
class Engine {
 public:
  /// Throws ValidationError for an invalid model.
  Engine(QualityModel model, Store& store);

  std::shared_ptr<const QualityModel> model() const;
  /// Validates, then swaps atomically. Throws ValidationError.
  void replace_model(QualityModel model);

  /// Evaluates, persists the snapshot, detects and persists alerts. Throws
  /// AssessmentBusy when another run is active. `evaluated_at` defaults to
  /// the wall clock.
  AssessmentResult run_assessment(const AssessmentRequest& request,
                                  std::optional<Instant> evaluated_at = std::nullopt);

  /// Evaluation under the delta-applied model; never persisted.
  Snapshot what_if(const AssessmentRequest& request, const WhatIfDelta& delta,
                   std::optional<Instant> evaluated_at = std::nullopt) const;

  /// Holds the run slot while owned; run_assessment fails with
  /// AssessmentBusy meanwhile.
  std::unique_lock<std::mutex> try_acquire_run();

  Store& store() { return store_; }
  const Store& store() const { return store_; }

 private:
  AssessmentResult run_locked(const AssessmentRequest& request, Instant evaluated_at);

  Store& store_;
  mutable std::mutex model_mutex_;
  std::shared_ptr<const QualityModel> model_;
  std::mutex run_mutex_;
};

}  // namespace qgauge
