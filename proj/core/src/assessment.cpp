#include "qgauge/assessment.hpp"

#include <algorithm>
#include <tuple>

#include <spdlog/spdlog.h>

#include "qgauge/alerts.hpp"

namespace qgauge {

std::optional<double> aggregate_children(std::span<const ChildValue> children) {
  double weighted = 0.0;
  double total_weight = 0.0;
  bool any = false;
  for (const auto& c : children) {
    if (!c.value) continue;
    any = true;
    weighted += c.weight * *c.value;
    total_weight += c.weight;
  }
  if (!any) return std::nullopt;
  if (total_weight <= 0.0) return std::nullopt;
  return std::clamp(weighted / total_weight, 0.0, 1.0);
}

AssessmentRequest AssessmentRequest::trailing(Instant now, int days, Trigger trigger) {
  return {TimeWindow::trailing_days(now, days), trigger};
}

bool WhatIfDelta::empty() const {
  return weights.empty() && utilities.empty() && thresholds.empty() && params.empty();
}

WhatIfDelta delta_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ModelError("what-if delta must be an object");
  WhatIfDelta d;
  for (const auto& [key, value] : j.items()) {
    if (key != "weights" && key != "utilities" && key != "thresholds" && key != "params") {
      throw ModelError("unknown what-if field '" + key + "'");
    }
  }
  try {
    if (auto it = j.find("weights"); it != j.end()) {
      if (!it->is_array()) throw ModelError("weights must be an array");
      for (const auto& e : *it) {
        if (!e.is_object() || !e.contains("parent") || !e.contains("child") || !e.contains("weight")) {
          throw ModelError("weights entries need parent, child and weight");
        }
        d.weights.push_back({e.at("parent").get<std::string>(), e.at("child").get<std::string>(),
                             e.at("weight").get<double>()});
      }
    }
    if (auto it = j.find("utilities"); it != j.end()) {
      if (!it->is_object()) throw ModelError("utilities must be an object");
      for (const auto& [id, u] : it->items()) d.utilities.emplace(id, utility_from_json(u));
    }
    if (auto it = j.find("thresholds"); it != j.end()) {
      if (!it->is_object()) throw ModelError("thresholds must be an object");
      for (const auto& [id, t] : it->items()) d.thresholds.emplace(id, thresholds_from_json(t));
    }
    if (auto it = j.find("params"); it != j.end()) {
      if (!it->is_object()) throw ModelError("params must be an object");
      for (const auto& [id, p] : it->items()) d.params.emplace(id, params_from_json(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("malformed what-if delta: ") + e.what());
  }
  return d;
}

nlohmann::json delta_to_json(const WhatIfDelta& d) {
  nlohmann::json j = nlohmann::json::object();
  if (!d.weights.empty()) {
    auto& w = j["weights"] = nlohmann::json::array();
    for (const auto& e : d.weights) w.push_back({{"parent", e.parent_id}, {"child", e.child_id}, {"weight", e.weight}});
  }
  if (!d.utilities.empty()) {
    auto& u = j["utilities"] = nlohmann::json::object();
    for (const auto& [id, f] : d.utilities) u[id] = utility_to_json(f);
  }
  if (!d.thresholds.empty()) {
    auto& t = j["thresholds"] = nlohmann::json::object();
    for (const auto& [id, th] : d.thresholds) t[id] = thresholds_to_json(th);
  }
  if (!d.params.empty()) {
    auto& p = j["params"] = nlohmann::json::object();
    for (const auto& [id, ps] : d.params) p[id] = params_to_json(ps);
  }
  return j;
}

QualityModel apply_delta(const QualityModel& model, const WhatIfDelta& delta) {
  QualityModel out = model;
  auto metric = [&](const std::string& id) -> MetricDef& {
    auto it = std::find_if(out.metrics.begin(), out.metrics.end(), [&](const MetricDef& m) { return m.id == id; });
    if (it == out.metrics.end()) throw ModelError("unknown metric '" + id + "'");
    return *it;
  };
  for (const auto& w : delta.weights) {
    auto it = std::find_if(out.edges.begin(), out.edges.end(), [&](const Edge& e) {
      return e.parent_id == w.parent_id && e.child_id == w.child_id;
    });
    if (it == out.edges.end()) throw ModelError("unknown edge " + w.parent_id + " -> " + w.child_id);
    it->weight = w.weight;
  }
  for (const auto& [id, u] : delta.utilities) metric(id).utility = u;
  for (const auto& [id, p] : delta.params) {
    auto& m = metric(id);
    for (const auto& [key, value] : p) m.params.insert_or_assign(key, value);
  }
  for (const auto& [id, t] : delta.thresholds) {
    bool found = false;
    for (auto* group : {&out.aspects, &out.factors}) {
      for (auto& e : *group) {
        if (e.id == id) {
          e.thresholds = t;
          found = true;
        }
      }
    }
    if (!found) metric(id).thresholds = t;
  }
  if (auto violations = validate_model(out); !violations.empty()) {
    throw ValidationError(std::move(violations));
  }
  return out;
}

namespace {

SnapshotEntry metric_entry(const QualityModel& model, const MetricValue& mv) {
  SnapshotEntry e;
  e.stratum = Stratum::metric;
  e.value = mv.value;
  e.color = classify_color(mv.value, *model.thresholds_of(mv.metric_id));
  e.raw_summary = mv.raw_summary;
  e.n_entities = mv.n_entities;
  e.offenders = mv.offenders;
  return e;
}

void aggregate_stratum(const QualityModel& model, const std::vector<ElementDef>& elements, Stratum stratum,
                       Snapshot& snap) {
  for (const auto& el : elements) {
    std::vector<ChildValue> children;
    double with_data = 0;
    for (const Edge* edge : model.children_of(el.id)) {
      const SnapshotEntry* child = snap.find(edge->child_id);
      ChildValue cv{child ? child->value : std::nullopt, edge->weight};
      if (cv.value) ++with_data;
      children.push_back(cv);
    }
    SnapshotEntry e;
    e.stratum = stratum;
    e.value = aggregate_children(children);
    e.color = classify_color(e.value, el.thresholds);
    e.raw_summary = {{"children", static_cast<double>(children.size())}, {"children_with_data", with_data}};
    snap.entries[el.id] = std::move(e);
  }
}

template <typename Fetch>
Snapshot evaluate_with(const QualityModel& model, Fetch&& fetch, TimeWindow window, Instant evaluated_at) {
  if (!(window.from < window.to)) throw ModelError("assessment window must have from < to");
  std::map<std::string, MetricValue> values;
  for (const auto& def : model.metrics) {
    const TimeWindow effective = effective_window(def, window);
    const std::vector<RawRecord>& records = fetch(def.source_kind, record_query_window(def, effective));
    try {
      values.emplace(def.id, compute_assessed_metric(def, records, effective));
    } catch (const std::invalid_argument& e) {
      throw ModelError(e.what());
    }
  }
  return assemble_snapshot(model, values, window, evaluated_at);
}

}  // namespace

Snapshot assemble_snapshot(const QualityModel& model, const std::map<std::string, MetricValue>& metrics,
                           TimeWindow window, Instant evaluated_at) {
  Snapshot snap;
  snap.evaluated_at = evaluated_at;
  snap.window = window;
  for (const auto& def : model.metrics) {
    auto it = metrics.find(def.id);
    if (it == metrics.end()) {
      SnapshotEntry e;
      e.stratum = Stratum::metric;
      snap.entries[def.id] = std::move(e);
    } else {
      snap.entries[def.id] = metric_entry(model, it->second);
    }
  }
  aggregate_stratum(model, model.factors, Stratum::factor, snap);
  aggregate_stratum(model, model.aspects, Stratum::aspect, snap);
  return snap;
}

Snapshot evaluate(const QualityModel& model, const Store& store, TimeWindow window, Instant evaluated_at) {
  std::map<std::tuple<SourceKind, Instant, Instant>, std::vector<RawRecord>> cache;
  auto fetch = [&](SourceKind kind, TimeWindow w) -> const std::vector<RawRecord>& {
    auto key = std::tuple{kind, w.from, w.to};
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, store.query_raw(kind, w)).first;
    return it->second;
  };
  return evaluate_with(model, fetch, window, evaluated_at);
}

Snapshot evaluate_records(const QualityModel& model, std::span<const RawRecord> records, TimeWindow window,
                          Instant evaluated_at) {
  std::vector<RawRecord> sorted(records.begin(), records.end());
  std::sort(sorted.begin(), sorted.end(), [](const RawRecord& a, const RawRecord& b) {
    return std::tie(a.timestamp, a.record_id) < std::tie(b.timestamp, b.record_id);
  });
  std::map<std::tuple<SourceKind, Instant, Instant>, std::vector<RawRecord>> cache;
  auto fetch = [&](SourceKind kind, TimeWindow w) -> const std::vector<RawRecord>& {
    auto key = std::tuple{kind, w.from, w.to};
    auto it = cache.find(key);
    if (it == cache.end()) {
      std::vector<RawRecord> picked;
      for (const auto& r : sorted) {
        if (r.kind() == kind && w.contains(r.timestamp)) picked.push_back(r);
      }
      it = cache.emplace(key, std::move(picked)).first;
    }
    return it->second;
  };
  return evaluate_with(model, fetch, window, evaluated_at);
}

Engine::Engine(QualityModel model, Store& store) : store_(store) {
  if (auto violations = validate_model(model); !violations.empty()) {
    throw ValidationError(std::move(violations));
  }
  model_ = std::make_shared<const QualityModel>(std::move(model));
}

std::shared_ptr<const QualityModel> Engine::model() const {
  std::lock_guard lock(model_mutex_);
  return model_;
}

void Engine::replace_model(QualityModel model) {
  if (auto violations = validate_model(model); !violations.empty()) {
    throw ValidationError(std::move(violations));
  }
  auto next = std::make_shared<const QualityModel>(std::move(model));
  std::lock_guard lock(model_mutex_);
  model_ = std::move(next);
}

std::unique_lock<std::mutex> Engine::try_acquire_run() {
  return std::unique_lock(run_mutex_, std::try_to_lock);
}

AssessmentResult Engine::run_assessment(const AssessmentRequest& request, std::optional<Instant> evaluated_at) {
  auto slot = try_acquire_run();
  if (!slot.owns_lock()) throw AssessmentBusy();
  return run_locked(request, evaluated_at.value_or(now_utc()));
}

AssessmentResult Engine::run_locked(const AssessmentRequest& request, Instant evaluated_at) {
  const auto current = model();
  AssessmentResult result;
  result.snapshot = evaluate(*current, store_, request.window, evaluated_at);
  const auto previous = store_.latest_snapshot();
  result.snapshot.snapshot_id = store_.save_snapshot(result.snapshot);
  result.alerts = detect_alerts_lenient(previous, result.snapshot, *current);
  store_.append_alerts(result.alerts);
  spdlog::info("assessment {} over [{}, {}): {} alerts", result.snapshot.snapshot_id,
               format_instant(request.window.from), format_instant(request.window.to), result.alerts.size());
  return result;
}

Snapshot Engine::what_if(const AssessmentRequest& request, const WhatIfDelta& delta,
                         std::optional<Instant> evaluated_at) const {
  const QualityModel modified = apply_delta(*model(), delta);
  Snapshot snap = evaluate(modified, store_, request.window, evaluated_at.value_or(now_utc()));
  snap.transient = true;
  return snap;
}

}  // namespace qgauge
