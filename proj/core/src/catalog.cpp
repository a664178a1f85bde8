#include "qgauge/catalog.hpp"

#include <algorithm>

namespace qgauge {

namespace {

using Strings = std::vector<std::string>;

ParamSpec number(std::string name, double fallback) {
  return {std::move(name), false, ParamValue{fallback}};
}

ParamSpec list(std::string name, Strings fallback) {
  return {std::move(name), true, ParamValue{std::move(fallback)}};
}

ParamSpec required_list(std::string name) { return {std::move(name), true, std::nullopt}; }

ParamSpec top_n() { return number("top_n", kDefaultTopN); }

UtilityFunction identity(const Params&) { return PiecewiseLinear{{{0.0, 0.0}, {1.0, 1.0}}}; }

std::vector<ExtractorSpec> build_catalog() {
  std::vector<ExtractorSpec> c;
  c.push_back({"non_complex_files", EntityKind::per_file, SourceKind::file_measure,
               {number("complexity_threshold", 10), top_n()}, [](const Params& p) {
                 return UtilityFunction{
                     StepFunction{param_number(p, "complexity_threshold", 10), 1.0, 0.0}};
               }});
  c.push_back({"commented_files", EntityKind::per_file, SourceKind::file_measure,
               {number("comment_min_pct", 10), number("comment_max_pct", 30), top_n()},
               [](const Params& p) {
                 return UtilityFunction{PiecewiseLinear{{{0.0, 0.0},
                                                         {param_number(p, "comment_min_pct", 10), 1.0},
                                                         {param_number(p, "comment_max_pct", 30), 1.0},
                                                         {100.0, 0.0}}}};
               }});
  c.push_back({"absence_of_duplications", EntityKind::per_file, SourceKind::file_measure,
               {number("dup_threshold_pct", 5), top_n()}, [](const Params& p) {
                 return UtilityFunction{
                     StepFunction{param_number(p, "dup_threshold_pct", 5), 1.0, 0.0}};
               }});
  c.push_back({"fulfillment_critical_blocker_rules", EntityKind::per_file,
               SourceKind::file_measure, {top_n()},
               [](const Params&) { return UtilityFunction{StepFunction{1.0, 1.0, 0.0}}; }});
  c.push_back({"highly_changed_files", EntityKind::per_commit_window_file, SourceKind::commit,
               {number("change_limit", 5), top_n()}, [](const Params& p) {
                 return UtilityFunction{
                     StepFunction{param_number(p, "change_limit", 5), 1.0, 0.0}};
               }});
  c.push_back({"passed_tests", EntityKind::per_test_run, SourceKind::test_run, {top_n()},
               identity});
  c.push_back({"fast_test_builds", EntityKind::per_test_run, SourceKind::test_run,
               {number("duration_limit_sec", 300), top_n()}, [](const Params& p) {
                 return UtilityFunction{
                     StepFunction{param_number(p, "duration_limit_sec", 300), 1.0, 0.0}};
               }});
  c.push_back({"test_coverage", EntityKind::per_file, SourceKind::file_measure,
               {number("target_pct", 80), top_n()}, [](const Params& p) {
                 return UtilityFunction{
                     PiecewiseLinear{{{0.0, 0.0}, {param_number(p, "target_pct", 80), 1.0}}}};
               }});
  c.push_back({"non_bug_density", EntityKind::scalar, SourceKind::issue,
               {list("open_statuses", {"open", "in_progress"}), top_n()}, identity});
  c.push_back({"errors_at_runtime", EntityKind::scalar, SourceKind::log_entry,
               {number("max_errors", 10), top_n()}, [](const Params& p) {
                 return UtilityFunction{
                     PiecewiseLinear{{{0.0, 1.0}, {param_number(p, "max_errors", 10), 0.0}}}};
               }});
  c.push_back({"availability_uptime", EntityKind::scalar, SourceKind::availability_sample,
               {number("floor_pct", 99.0), number("goal_pct", 99.9), top_n()},
               [](const Params& p) {
                 return UtilityFunction{PiecewiseLinear{{{param_number(p, "floor_pct", 99.0), 0.0},
                                                         {param_number(p, "goal_pct", 99.9), 1.0}}}};
               }});
  c.push_back({"feature_usage", EntityKind::scalar, SourceKind::usage_event,
               {required_list("feature_catalog"), top_n()}, identity});
  c.push_back({"resolved_issues_dated", EntityKind::scalar, SourceKind::issue, {top_n()},
               identity});
  c.push_back({"issues_completely_specified", EntityKind::scalar, SourceKind::issue,
               {list("required_fields", {"description", "due_date", "assignee", "estimate_hours"}),
                top_n()},
               identity});
  return c;
}

}  // namespace

std::vector<std::string> ExtractorSpec::required_params() const {
  std::vector<std::string> out;
  for (const auto& p : params) {
    if (!p.default_value) out.push_back(p.name);
  }
  return out;
}

const std::vector<ExtractorSpec>& extractor_catalog() {
  static const std::vector<ExtractorSpec> catalog = build_catalog();
  return catalog;
}

const ExtractorSpec* find_extractor(std::string_view id) {
  const auto& c = extractor_catalog();
  auto it = std::find_if(c.begin(), c.end(), [&](const ExtractorSpec& s) { return s.id == id; });
  return it == c.end() ? nullptr : &*it;
}

Params with_default_params(const ExtractorSpec& spec, Params params) {
  for (const auto& p : spec.params) {
    if (p.default_value && params.find(p.name) == params.end()) {
      params.emplace(p.name, *p.default_value);
    }
  }
  return params;
}

}  // namespace qgauge
