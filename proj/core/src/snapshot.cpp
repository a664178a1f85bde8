#include "qgauge/snapshot.hpp"

#include <stdexcept>

namespace qgauge {

using nlohmann::json;

namespace {

Instant instant_field(const json& j, const char* key) {
  auto t = parse_instant(j.at(key).get<std::string>());
  if (!t) throw std::runtime_error(std::string("bad instant in field ") + key);
  return *t;
}

std::optional<double> value_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

}  // namespace

const SnapshotEntry* Snapshot::find(const std::string& id) const {
  auto it = entries.find(id);
  return it == entries.end() ? nullptr : &it->second;
}

bool same_values(const Snapshot& a, const Snapshot& b) {
  return a.window == b.window && a.entries == b.entries;
}

std::string_view to_string(ThresholdCrossed t) {
  return t == ThresholdCrossed::warning ? "warning" : "critical";
}

json value_to_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json entry_to_json(const SnapshotEntry& e) {
  json j = {{"stratum", to_string(e.stratum)},
            {"value", value_to_json(e.value)},
            {"color", to_string(e.color)},
            {"raw_summary", e.raw_summary}};
  if (e.stratum == Stratum::metric) {
    json offenders = json::array();
    for (const auto& o : e.offenders) {
      offenders.push_back({{"entity", o.entity}, {"base_value", o.base_value}, {"utility", o.utility}});
    }
    j["n_entities"] = e.n_entities;
    j["offenders"] = std::move(offenders);
  }
  return j;
}

SnapshotEntry entry_from_json(const json& j) {
  SnapshotEntry e;
  auto stratum = stratum_from_string(j.at("stratum").get<std::string>());
  auto color = color_from_string(j.at("color").get<std::string>());
  if (!stratum || !color) throw std::runtime_error("bad stratum or color in snapshot entry");
  e.stratum = *stratum;
  e.color = *color;
  e.value = value_field(j, "value");
  if (auto it = j.find("raw_summary"); it != j.end()) e.raw_summary = it->get<RawSummary>();
  if (auto it = j.find("n_entities"); it != j.end()) e.n_entities = it->get<std::size_t>();
  if (auto it = j.find("offenders"); it != j.end()) {
    for (const auto& o : *it) {
      e.offenders.push_back({o.at("entity").get<std::string>(), o.at("base_value").get<double>(),
                             o.at("utility").get<double>()});
    }
  }
  return e;
}

json snapshot_to_json(const Snapshot& s) {
  json entries = json::object();
  for (const auto& [id, e] : s.entries) entries[id] = entry_to_json(e);
  return {{"snapshot_id", s.snapshot_id},
          {"evaluated_at", format_instant(s.evaluated_at)},
          {"window", {{"from", format_instant(s.window.from)}, {"to", format_instant(s.window.to)}}},
          {"transient", s.transient},
          {"entries", std::move(entries)}};
}

Snapshot snapshot_from_json(const json& j) {
  Snapshot s;
  s.snapshot_id = j.at("snapshot_id").get<std::string>();
  s.evaluated_at = instant_field(j, "evaluated_at");
  s.window = {instant_field(j.at("window"), "from"), instant_field(j.at("window"), "to")};
  s.transient = j.value("transient", false);
  for (const auto& [id, e] : j.at("entries").items()) s.entries.emplace(id, entry_from_json(e));
  return s;
}

json series_to_json(const std::string& element_id, const std::vector<SeriesPoint>& points) {
  json out = json::array();
  for (const auto& p : points) {
    out.push_back({{"evaluated_at", format_instant(p.evaluated_at)},
                   {"snapshot_id", p.snapshot_id},
                   {"value", value_to_json(p.value)},
                   {"color", to_string(p.color)}});
  }
  return {{"element", element_id}, {"points", std::move(out)}};
}

json alert_to_json(const Alert& a) {
  return {{"alert_id", a.alert_id},
          {"element_id", a.element_id},
          {"stratum", to_string(a.stratum)},
          {"previous_color", a.previous_color ? json(to_string(*a.previous_color)) : json(nullptr)},
          {"new_color", to_string(a.new_color)},
          {"value", a.value},
          {"threshold_crossed", to_string(a.threshold_crossed)},
          {"evaluated_at", format_instant(a.evaluated_at)},
          {"snapshot_id", a.snapshot_id},
          {"acknowledged", a.acknowledged}};
}

Alert alert_from_json(const json& j) {
  Alert a;
  a.alert_id = j.at("alert_id").get<std::string>();
  a.element_id = j.at("element_id").get<std::string>();
  auto stratum = stratum_from_string(j.at("stratum").get<std::string>());
  auto color = color_from_string(j.at("new_color").get<std::string>());
  if (!stratum || !color) throw std::runtime_error("bad alert record");
  a.stratum = *stratum;
  a.new_color = *color;
  if (auto it = j.find("previous_color"); it != j.end() && !it->is_null()) {
    a.previous_color = color_from_string(it->get<std::string>());
  }
  a.value = j.at("value").get<double>();
  a.threshold_crossed = j.at("threshold_crossed").get<std::string>() == "critical"
                            ? ThresholdCrossed::critical
                            : ThresholdCrossed::warning;
  a.evaluated_at = instant_field(j, "evaluated_at");
  a.snapshot_id = j.value("snapshot_id", "");
  a.acknowledged = j.value("acknowledged", false);
  return a;
}

}  // namespace qgauge
