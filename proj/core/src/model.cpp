#include "qgauge/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "qgauge/catalog.hpp"

namespace qgauge {

using nlohmann::json;

namespace {

constexpr double kWeightTolerance = 1e-6;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ModelError(path + ": " + what);
}

const json* member(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

std::string read_string(const json& obj, const char* key, const std::string& path,
                        std::optional<std::string> fallback = std::nullopt) {
  const json* v = member(obj, key);
  if (!v) {
    if (fallback) return *fallback;
    fail(path + "." + key, "missing required string");
  }
  if (!v->is_string()) fail(path + "." + key, "expected string");
  return v->get<std::string>();
}

double read_number(const json& obj, const char* key, const std::string& path) {
  const json* v = member(obj, key);
  if (!v) fail(path + "." + key, "missing required number");
  if (!v->is_number()) fail(path + "." + key, "expected number");
  return v->get<double>();
}

const json& read_array(const json& obj, const char* key, const std::string& path) {
  static const json empty = json::array();
  const json* v = member(obj, key);
  if (!v) return empty;
  if (!v->is_array()) fail(path + "." + key, "expected array");
  return *v;
}

std::string fmt_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

ElementDef read_element(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected object");
  ElementDef e;
  e.id = read_string(j, "id", path);
  e.name = read_string(j, "name", path, e.id);
  if (const json* t = member(j, "thresholds")) e.thresholds = thresholds_from_json(*t);
  return e;
}

json element_to_json(const ElementDef& e) {
  return {{"id", e.id}, {"name", e.name}, {"thresholds", thresholds_to_json(e.thresholds)}};
}

}  // namespace

double param_number(const Params& params, std::string_view key, double fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  if (const double* d = std::get_if<double>(&it->second)) return *d;
  return fallback;
}

std::vector<std::string> param_list(const Params& params, std::string_view key,
                                    std::vector<std::string> fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  if (const auto* l = std::get_if<std::vector<std::string>>(&it->second)) return *l;
  return fallback;
}

// ---------------------------------------------------------------------------
// QualityModel lookups

std::optional<Stratum> QualityModel::stratum_of(std::string_view id) const {
  auto has = [&](const auto& v) {
    return std::any_of(v.begin(), v.end(), [&](const auto& e) { return e.id == id; });
  };
  if (has(aspects)) return Stratum::aspect;
  if (has(factors)) return Stratum::factor;
  if (has(metrics)) return Stratum::metric;
  return std::nullopt;
}

const MetricDef* QualityModel::find_metric(std::string_view id) const {
  auto it = std::find_if(metrics.begin(), metrics.end(),
                         [&](const MetricDef& m) { return m.id == id; });
  return it == metrics.end() ? nullptr : &*it;
}

const ElementDef* QualityModel::find_element(std::string_view id) const {
  for (const auto* v : {&aspects, &factors}) {
    auto it = std::find_if(v->begin(), v->end(), [&](const ElementDef& e) { return e.id == id; });
    if (it != v->end()) return &*it;
  }
  return nullptr;
}

const Thresholds* QualityModel::thresholds_of(std::string_view id) const {
  if (const auto* e = find_element(id)) return &e->thresholds;
  if (const auto* m = find_metric(id)) return &m->thresholds;
  return nullptr;
}

std::vector<const Edge*> QualityModel::children_of(std::string_view parent_id) const {
  std::vector<const Edge*> out;
  for (const auto& e : edges) {
    if (e.parent_id == parent_id) out.push_back(&e);
  }
  return out;
}

std::vector<std::string> QualityModel::element_ids() const {
  std::vector<std::string> ids;
  ids.reserve(aspects.size() + factors.size() + metrics.size());
  for (const auto& a : aspects) ids.push_back(a.id);
  for (const auto& f : factors) ids.push_back(f.id);
  for (const auto& m : metrics) ids.push_back(m.id);
  return ids;
}

// ---------------------------------------------------------------------------
// JSON encoding

json utility_to_json(const UtilityFunction& u) {
  if (const auto* pl = std::get_if<PiecewiseLinear>(&u)) {
    json points = json::array();
    for (const auto& p : pl->points) points.push_back(json::array({p.x, p.y}));
    return {{"kind", "linear"}, {"points", points}};
  }
  const auto& s = std::get<StepFunction>(u);
  return {{"kind", "step"},
          {"threshold", s.threshold},
          {"below", s.below_value},
          {"at_or_above", s.at_or_above_value}};
}

UtilityFunction utility_from_json(const json& j) {
  if (!j.is_object()) fail("utility", "expected object");
  const std::string kind = read_string(j, "kind", "utility");
  if (kind == "linear") {
    PiecewiseLinear pl;
    for (const auto& p : read_array(j, "points", "utility")) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
        fail("utility.points", "each point must be [x, y]");
      }
      pl.points.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    return pl;
  }
  if (kind == "step") {
    return StepFunction{read_number(j, "threshold", "utility"), read_number(j, "below", "utility"),
                        read_number(j, "at_or_above", "utility")};
  }
  fail("utility.kind", "unknown utility kind '" + kind + "'");
}

json thresholds_to_json(const Thresholds& t) {
  return {{"warning", t.warning}, {"critical", t.critical}};
}

Thresholds thresholds_from_json(const json& j) {
  if (!j.is_object()) fail("thresholds", "expected object");
  Thresholds t;
  if (member(j, "warning")) t.warning = read_number(j, "warning", "thresholds");
  if (member(j, "critical")) t.critical = read_number(j, "critical", "thresholds");
  return t;
}

json params_to_json(const Params& p) {
  json out = json::object();
  for (const auto& [key, value] : p) {
    std::visit([&, &k = key](const auto& v) { out[k] = v; }, value);
  }
  return out;
}

Params params_from_json(const json& j) {
  if (!j.is_object()) fail("params", "expected object");
  Params p;
  for (const auto& [key, value] : j.items()) {
    if (value.is_number()) {
      p.emplace(key, value.get<double>());
    } else if (value.is_array()) {
      std::vector<std::string> items;
      for (const auto& item : value) {
        if (!item.is_string()) fail("params." + key, "list params hold strings only");
        items.push_back(item.get<std::string>());
      }
      p.emplace(key, std::move(items));
    } else {
      fail("params." + key, "expected number or list of strings");
    }
  }
  return p;
}

QualityModel model_from_json(const json& doc) {
  if (!doc.is_object()) fail("model", "top level must be an object");
  QualityModel m;
  if (const json* d = member(doc, "default_window_days")) {
    if (!d->is_number_integer()) fail("default_window_days", "expected integer");
    m.default_window_days = d->get<int>();
  }
  std::set<std::string> seen;
  auto claim = [&](const std::string& id) {
    if (!seen.insert(id).second) throw ModelError("duplicate id '" + id + "'");
  };

  const json& aspects = read_array(doc, "aspects", "model");
  for (std::size_t i = 0; i < aspects.size(); ++i) {
    m.aspects.push_back(read_element(aspects[i], "aspects[" + std::to_string(i) + "]"));
    claim(m.aspects.back().id);
  }
  const json& factors = read_array(doc, "factors", "model");
  for (std::size_t i = 0; i < factors.size(); ++i) {
    m.factors.push_back(read_element(factors[i], "factors[" + std::to_string(i) + "]"));
    claim(m.factors.back().id);
  }

  const json& metrics = read_array(doc, "metrics", "model");
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    const json& j = metrics[i];
    const std::string path = "metrics[" + std::to_string(i) + "]";
    if (!j.is_object()) fail(path, "expected object");
    MetricDef def;
    def.id = read_string(j, "id", path);
    claim(def.id);
    def.name = read_string(j, "name", path, def.id);
    def.description = read_string(j, "description", path, "");
    def.extractor = read_string(j, "extractor", path);
    const ExtractorSpec* spec = find_extractor(def.extractor);
    if (!spec) {
      throw ModelError("unknown extractor '" + def.extractor + "' in metric '" + def.id + "'");
    }
    def.source_kind = spec->source_kind;
    if (const json* k = member(j, "source_kind")) {
      auto kind = k->is_string() ? source_kind_from_string(k->get<std::string>()) : std::nullopt;
      if (!kind) fail(path + ".source_kind", "unknown source kind");
      def.source_kind = *kind;
    }
    if (const json* p = member(j, "params")) def.params = params_from_json(*p);
    def.params = with_default_params(*spec, std::move(def.params));
    if (const json* u = member(j, "utility")) {
      def.utility = utility_from_json(*u);
    } else {
      def.utility = spec->default_utility(def.params);
    }
    if (const json* w = member(j, "window_days")) {
      if (!w->is_number_integer()) fail(path + ".window_days", "expected integer");
      def.window_days = w->get<int>();
    }
    if (const json* t = member(j, "thresholds")) def.thresholds = thresholds_from_json(*t);
    m.metrics.push_back(std::move(def));
  }

  const json& edges = read_array(doc, "edges", "model");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string path = "edges[" + std::to_string(i) + "]";
    if (!edges[i].is_object()) fail(path, "expected object");
    m.edges.push_back({read_string(edges[i], "parent", path), read_string(edges[i], "child", path),
                       read_number(edges[i], "weight", path)});
  }
  return m;
}

QualityModel parse_model_unchecked(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ModelError("syntax error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  return model_from_json(doc);
}

QualityModel parse_model(std::string_view document) {
  QualityModel m = parse_model_unchecked(document);
  if (auto violations = validate_model(m); !violations.empty()) {
    throw ValidationError(std::move(violations));
  }
  return m;
}

json model_to_json(const QualityModel& m) {
  json doc;
  doc["default_window_days"] = m.default_window_days;
  doc["aspects"] = json::array();
  for (const auto& a : m.aspects) doc["aspects"].push_back(element_to_json(a));
  doc["factors"] = json::array();
  for (const auto& f : m.factors) doc["factors"].push_back(element_to_json(f));
  doc["metrics"] = json::array();
  for (const auto& d : m.metrics) {
    json j = {{"id", d.id},
              {"name", d.name},
              {"description", d.description},
              {"extractor", d.extractor},
              {"source_kind", to_string(d.source_kind)},
              {"utility", utility_to_json(d.utility)},
              {"params", params_to_json(d.params)},
              {"thresholds", thresholds_to_json(d.thresholds)}};
    if (d.window_days) j["window_days"] = *d.window_days;
    doc["metrics"].push_back(std::move(j));
  }
  doc["edges"] = json::array();
  for (const auto& e : m.edges) {
    doc["edges"].push_back({{"parent", e.parent_id}, {"child", e.child_id}, {"weight", e.weight}});
  }
  return doc;
}

std::string serialize_model(const QualityModel& m) { return model_to_json(m).dump(2); }

// ---------------------------------------------------------------------------
// Validation

std::vector<std::string> utility_problems(const UtilityFunction& u) {
  std::vector<std::string> out;
  auto in_unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
  if (const auto* pl = std::get_if<PiecewiseLinear>(&u)) {
    if (pl->points.size() < 2) out.push_back("piecewise-linear needs at least 2 breakpoints");
    for (std::size_t i = 0; i < pl->points.size(); ++i) {
      const auto& p = pl->points[i];
      if (!std::isfinite(p.x)) out.push_back("breakpoint x must be finite");
      if (!in_unit(p.y)) out.push_back("breakpoint y " + fmt_number(p.y) + " outside [0,1]");
      if (i > 0 && !(p.x > pl->points[i - 1].x)) {
        out.push_back("breakpoint x values must be strictly increasing");
      }
    }
  } else {
    const auto& s = std::get<StepFunction>(u);
    if (!std::isfinite(s.threshold)) out.push_back("step threshold must be finite");
    if (!in_unit(s.below_value) || !in_unit(s.at_or_above_value)) {
      out.push_back("step values must lie in [0,1]");
    }
  }
  return out;
}

std::vector<Violation> validate_model(const QualityModel& m) {
  std::vector<Violation> out;
  auto add = [&](std::string element, std::string rule, std::string message) {
    out.push_back({std::move(element), std::move(rule), std::move(message)});
  };

  if (m.default_window_days <= 0) {
    add("default_window_days", "window_days", "default_window_days must be positive");
  }

  std::set<std::string> seen;
  auto check_common = [&](const std::string& id, const Thresholds& t) {
    if (id.empty()) add(id, "empty_id", "element with empty id");
    if (!seen.insert(id).second) add(id, "duplicate_id", "duplicate id " + id);
    if (!(0.0 <= t.critical && t.critical <= t.warning && t.warning <= 1.0)) {
      add(id, "thresholds", "thresholds of " + id + " violate 0 <= critical <= warning <= 1");
    }
  };
  for (const auto& a : m.aspects) check_common(a.id, a.thresholds);
  for (const auto& f : m.factors) check_common(f.id, f.thresholds);
  for (const auto& d : m.metrics) {
    check_common(d.id, d.thresholds);
    for (const auto& problem : utility_problems(d.utility)) {
      add(d.id, "utility", "utility of " + d.id + ": " + problem);
    }
    if (d.window_days && *d.window_days <= 0) {
      add(d.id, "window_days", "metric " + d.id + " window_days must be positive");
    }
    const ExtractorSpec* spec = find_extractor(d.extractor);
    if (!spec) {
      add(d.id, "unknown_extractor", "metric " + d.id + " uses unknown extractor " + d.extractor);
      continue;
    }
    if (spec->source_kind != d.source_kind) {
      add(d.id, "source_kind",
          "metric " + d.id + " source_kind " + std::string(to_string(d.source_kind)) +
              " does not match extractor " + spec->id + " (expects " +
              std::string(to_string(spec->source_kind)) + ")");
    }
    for (const auto& p : spec->params) {
      auto it = d.params.find(p.name);
      if (it == d.params.end()) {
        if (!p.default_value) {
          add(d.id, "missing_param", "metric " + d.id + " is missing required param " + p.name);
        }
        continue;
      }
      const bool is_list = std::holds_alternative<std::vector<std::string>>(it->second);
      if (is_list != p.is_list) {
        add(d.id, "param_type",
            "metric " + d.id + " param " + p.name + " must be a " + (p.is_list ? "list" : "number"));
      }
    }
  }

  std::set<std::pair<std::string, std::string>> edge_seen;
  for (const auto& e : m.edges) {
    const std::string label = e.parent_id + " -> " + e.child_id;
    const auto ps = m.stratum_of(e.parent_id);
    const auto cs = m.stratum_of(e.child_id);
    if (!ps) add(e.parent_id, "edge_endpoint", "edge " + label + ": unknown parent");
    if (!cs) add(e.child_id, "edge_endpoint", "edge " + label + ": unknown child");
    if (ps && cs) {
      const bool adjacent = (*ps == Stratum::aspect && *cs == Stratum::factor) ||
                            (*ps == Stratum::factor && *cs == Stratum::metric);
      if (!adjacent) add(e.parent_id, "edge_strata", "edge " + label + " connects non-adjacent strata");
    }
    if (!(e.weight > 0.0 && e.weight <= 1.0)) {
      add(e.parent_id, "edge_weight",
          "edge " + label + " weight " + fmt_number(e.weight) + " outside (0,1]");
    }
    if (!edge_seen.emplace(e.parent_id, e.child_id).second) {
      add(e.parent_id, "duplicate_edge", "duplicate edge " + label);
    }
  }

  auto check_parent = [&](const std::string& id, const char* what, const char* children) {
    const auto kids = m.children_of(id);
    if (kids.empty()) {
      add(id, "no_children", std::string(what) + " " + id + " has no " + children);
      return;
    }
    double sum = 0.0;
    for (const Edge* e : kids) sum += e->weight;
    if (std::abs(sum - 1.0) > kWeightTolerance) {
      add(id, "weight_sum", "weights sum " + fmt_number(sum) + " ≠ 1 for parent " + id);
    }
  };
  for (const auto& a : m.aspects) check_parent(a.id, "aspect", "factors");
  for (const auto& f : m.factors) check_parent(f.id, "factor", "metrics");
  return out;
}

// ---------------------------------------------------------------------------
// Primitive evaluations

double evaluate_utility(const UtilityFunction& u, double x) {
  double y = 0.0;
  if (const auto* pl = std::get_if<PiecewiseLinear>(&u)) {
    const auto& pts = pl->points;
    if (pts.empty()) return 0.0;
    if (!(x > pts.front().x)) {
      y = pts.front().y;
    } else if (!(x < pts.back().x)) {
      y = pts.back().y;
    } else {
      auto hi = std::upper_bound(pts.begin(), pts.end(), x,
                                 [](double v, const Breakpoint& b) { return v < b.x; });
      auto lo = std::prev(hi);
      if (lo->x == x) {
        y = lo->y;
      } else {
        const double t = (x - lo->x) / (hi->x - lo->x);
        y = lo->y + t * (hi->y - lo->y);
      }
    }
  } else {
    const auto& s = std::get<StepFunction>(u);
    y = x < s.threshold ? s.below_value : s.at_or_above_value;
  }
  return std::clamp(y, 0.0, 1.0);
}

Color classify_color(std::optional<double> value, const Thresholds& t) {
  if (!value || std::isnan(*value)) return Color::no_data;
  if (*value >= t.warning) return Color::green;
  if (*value >= t.critical) return Color::orange;
  return Color::red;
}

}  // namespace qgauge
