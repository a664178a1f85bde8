#include "qgauge/alerts.hpp"

#include <algorithm>
#include <set>

#include "qgauge/records.hpp"

namespace qgauge {

namespace {

std::vector<Alert> transition_alerts(const std::optional<Snapshot>& prev, const Snapshot& curr,
                                     const QualityModel& model) {
  std::vector<Alert> out;
  for (const auto& id : model.element_ids()) {
    const SnapshotEntry* now = curr.find(id);
    if (!now || !now->value) continue;
    const SnapshotEntry* before = prev ? prev->find(id) : nullptr;
    std::optional<Color> previous_color;
    if (before) {
      if (!is_deterioration(before->color, now->color)) continue;
      previous_color = before->color;
    } else if (now->color != Color::orange && now->color != Color::red) {
      continue;
    }
    Alert a;
    a.alert_id = "alert-" + derive_record_id({curr.snapshot_id, id});
    a.element_id = id;
    a.stratum = now->stratum;
    a.previous_color = previous_color;
    a.new_color = now->color;
    a.value = *now->value;
    a.threshold_crossed = now->color == Color::red ? ThresholdCrossed::critical : ThresholdCrossed::warning;
    a.evaluated_at = curr.evaluated_at;
    a.snapshot_id = curr.snapshot_id;
    out.push_back(std::move(a));
  }
  return out;
}

std::set<std::string> element_set(const Snapshot& s) {
  std::set<std::string> ids;
  for (const auto& [id, e] : s.entries) ids.insert(id);
  return ids;
}

DrilldownNode build_node(const Snapshot& snapshot, const std::string& id, const QualityModel& model) {
  const SnapshotEntry* entry = snapshot.find(id);
  const auto stratum = model.stratum_of(id);
  if (!entry || !stratum) throw AlertError("unknown element '" + id + "'");
  DrilldownNode node;
  node.element_id = id;
  node.stratum = *stratum;
  node.value = entry->value;
  node.color = entry->color;
  node.raw_summary = entry->raw_summary;
  node.n_entities = entry->n_entities;
  node.offenders = entry->offenders;

  const auto edges = model.children_of(id);
  double with_data = 0.0;
  for (const Edge* e : edges) {
    const SnapshotEntry* child = snapshot.find(e->child_id);
    if (child && child->value) with_data += e->weight;
  }
  for (const Edge* e : edges) {
    DrilldownNode child = build_node(snapshot, e->child_id, model);
    child.weight_from_parent = e->weight;
    if (child.value && with_data > 0.0) {
      child.renormalized_weight = e->weight / with_data;
      child.contribution = e->weight * *child.value;
    } else {
      child.renormalized_weight = 0.0;
      child.contribution = 0.0;
    }
    node.children.push_back(std::move(child));
  }
  std::stable_sort(node.children.begin(), node.children.end(), [](const DrilldownNode& a, const DrilldownNode& b) {
    if (a.value.has_value() != b.value.has_value()) return a.value.has_value();
    if (a.value && *a.value != *b.value) return *a.value < *b.value;
    return a.element_id < b.element_id;
  });
  return node;
}

}  // namespace

std::vector<Alert> detect_alerts(const std::optional<Snapshot>& prev, const Snapshot& curr,
                                 const QualityModel& model) {
  if (prev && element_set(*prev) != element_set(curr)) {
    throw AlertError("snapshots " + prev->snapshot_id + " and " + curr.snapshot_id +
                     " cover different element sets");
  }
  return transition_alerts(prev, curr, model);
}

std::vector<Alert> detect_alerts_lenient(const std::optional<Snapshot>& prev, const Snapshot& curr,
                                         const QualityModel& model) {
  return transition_alerts(prev, curr, model);
}

DrilldownNode drilldown(const Snapshot& snapshot, const std::string& element_id, const QualityModel& model) {
  DrilldownNode root = build_node(snapshot, element_id, model);
  root.weight_from_parent = 1.0;
  root.renormalized_weight = 1.0;
  root.contribution = root.value.value_or(0.0);
  return root;
}

nlohmann::json drilldown_to_json(const DrilldownNode& node) {
  nlohmann::json j{{"element_id", node.element_id},
                   {"stratum", to_string(node.stratum)},
                   {"value", value_to_json(node.value)},
                   {"color", to_string(node.color)},
                   {"weight_from_parent", node.weight_from_parent},
                   {"renormalized_weight", node.renormalized_weight},
                   {"contribution", node.contribution},
                   {"raw_summary", node.raw_summary}};
  auto& children = j["children"] = nlohmann::json::array();
  for (const auto& c : node.children) children.push_back(drilldown_to_json(c));
  if (node.stratum == Stratum::metric) {
    j["n_entities"] = node.n_entities;
    auto& offenders = j["offenders"] = nlohmann::json::array();
    for (const auto& o : node.offenders) {
      offenders.push_back({{"entity", o.entity}, {"base_value", o.base_value}, {"utility", o.utility}});
    }
  }
  return j;
}

}  // namespace qgauge
