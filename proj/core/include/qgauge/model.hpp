#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "qgauge/types.hpp"

namespace qgauge {

struct Breakpoint {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Breakpoint&) const = default;
};

/// Linear interpolation between breakpoints (strictly increasing x), clamped
/// to the first/last y outside the breakpoint domain.
struct PiecewiseLinear {
  std::vector<Breakpoint> points;

  bool operator==(const PiecewiseLinear&) const = default;
};

struct StepFunction {
  double threshold = 0.0;
  double below_value = 1.0;
  double at_or_above_value = 0.0;

  bool operator==(const StepFunction&) const = default;
};

/// Maps a raw-scale value onto [0,1], 1 being best.
using UtilityFunction = std::variant<PiecewiseLinear, StepFunction>;

struct Thresholds {
  double warning = 0.67;
  double critical = 0.33;

  bool operator==(const Thresholds&) const = default;
};

using ParamValue = std::variant<double, std::vector<std::string>>;
using Params = std::map<std::string, ParamValue, std::less<>>;

double param_number(const Params& params, std::string_view key, double fallback);
std::vector<std::string> param_list(const Params& params, std::string_view key,
                                    std::vector<std::string> fallback = {});

/// Aspect or factor.
struct ElementDef {
  std::string id;
  std::string name;
  Thresholds thresholds;

  bool operator==(const ElementDef&) const = default;
};

struct MetricDef {
  std::string id;
  std::string name;
  std::string description;
  std::string extractor;
  SourceKind source_kind = SourceKind::file_measure;
  UtilityFunction utility;
  Params params;
  /// Overrides the request window with a trailing window of this length.
  std::optional<int> window_days;
  Thresholds thresholds;

  bool operator==(const MetricDef&) const = default;
};

struct Edge {
  std::string parent_id;
  std::string child_id;
  double weight = 1.0;

  bool operator==(const Edge&) const = default;
};

/// Three-strata weighted DAG. Immutable once handed out; replace it wholesale.
struct QualityModel {
  std::vector<ElementDef> aspects;
  std::vector<ElementDef> factors;
  std::vector<MetricDef> metrics;
  std::vector<Edge> edges;
  int default_window_days = 14;

  bool operator==(const QualityModel&) const = default;

  std::optional<Stratum> stratum_of(std::string_view id) const;
  const MetricDef* find_metric(std::string_view id) const;
  const ElementDef* find_element(std::string_view id) const;
  /// Thresholds for any element, metrics included.
  const Thresholds* thresholds_of(std::string_view id) const;
  std::vector<const Edge*> children_of(std::string_view parent_id) const;
  /// Every element id, aspects first, then factors, then metrics.
  std::vector<std::string> element_ids() const;
};

/// Parses and validates. Throws ModelError on syntax errors, unknown
/// extractors, duplicate ids or type mismatches, and ValidationError when the
/// parsed model breaks an invariant.
QualityModel parse_model(std::string_view document);

/// Same as parse_model but returns invalid models instead of throwing
/// ValidationError, so callers can report every violation.
QualityModel parse_model_unchecked(std::string_view document);
QualityModel model_from_json(const nlohmann::json& document);

nlohmann::json model_to_json(const QualityModel& model);
std::string serialize_model(const QualityModel& model);

std::vector<Violation> validate_model(const QualityModel& model);

nlohmann::json utility_to_json(const UtilityFunction& u);
UtilityFunction utility_from_json(const nlohmann::json& j);
nlohmann::json thresholds_to_json(const Thresholds& t);
Thresholds thresholds_from_json(const nlohmann::json& j);
nlohmann::json params_to_json(const Params& p);
Params params_from_json(const nlohmann::json& j);

/// Empty when the function satisfies its invariants.
std::vector<std::string> utility_problems(const UtilityFunction& u);

double evaluate_utility(const UtilityFunction& u, double x);

Color classify_color(std::optional<double> value, const Thresholds& t);

}  // namespace qgauge
