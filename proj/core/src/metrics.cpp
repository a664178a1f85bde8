#include "qgauge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "qgauge/catalog.hpp"

namespace qgauge {

namespace {

constexpr double kFullUtility = 1.0;

std::size_t top_n_of(const Params& params) {
  const double n = param_number(params, "top_n", kDefaultTopN);
  return n < 0 ? 0 : static_cast<std::size_t>(n);
}

std::vector<const RawRecord*> in_window(std::span<const RawRecord> records, SourceKind kind,
                                        TimeWindow window) {
  std::vector<const RawRecord*> out;
  for (const auto& r : records) {
    if (r.kind() == kind && window.contains(r.timestamp)) out.push_back(&r);
  }
  return out;
}

/// Latest measure per path inside the window.
std::vector<const RawRecord*> latest_files(std::span<const RawRecord> records, TimeWindow window) {
  std::map<std::string, const RawRecord*> latest;
  for (const RawRecord* r : in_window(records, SourceKind::file_measure, window)) {
    const auto& path = r->as<FileMeasure>().path;
    auto [it, fresh] = latest.try_emplace(path, r);
    if (!fresh && (it->second->timestamp < r->timestamp ||
                   (it->second->timestamp == r->timestamp && it->second->record_id < r->record_id))) {
      it->second = r;
    }
  }
  std::vector<const RawRecord*> out;
  for (const auto& [path, r] : latest) out.push_back(r);
  return out;
}

MetricValue entity_metric(const MetricDef& def, std::vector<EntityScore> scores, RawSummary summary) {
  MetricValue mv;
  mv.metric_id = def.id;
  mv.n_entities = scores.size();
  mv.value = mean_utility(scores);
  summary["entities"] = static_cast<double>(scores.size());
  if (!scores.empty()) {
    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    std::size_t full = 0;
    for (const auto& s : scores) {
      sum += s.base_value;
      lo = std::min(lo, s.base_value);
      hi = std::max(hi, s.base_value);
      if (s.utility >= kFullUtility) ++full;
    }
    summary["mean_base"] = sum / static_cast<double>(scores.size());
    summary["min_base"] = lo;
    summary["max_base"] = hi;
    summary["entities_at_full_utility"] = static_cast<double>(full);
  }
  mv.raw_summary = std::move(summary);
  mv.offenders = select_offenders(std::move(scores), top_n_of(def.params));
  return mv;
}

MetricValue scalar_metric(const MetricDef& def, std::optional<double> base, std::size_t n,
                          RawSummary summary, std::vector<EntityScore> offenders) {
  MetricValue mv;
  mv.metric_id = def.id;
  mv.n_entities = n;
  if (base) {
    mv.value = evaluate_utility(def.utility, *base);
    summary["base_value"] = *base;
  }
  mv.raw_summary = std::move(summary);
  mv.offenders = select_offenders(std::move(offenders), top_n_of(def.params));
  return mv;
}

bool is_member(const Issue& issue, TimeWindow window) {
  return window.contains(issue.created) || window.contains(issue.updated);
}

// --- per-file extractors -----------------------------------------------------

MetricValue non_complex_files(const MetricDef& def, std::span<const RawRecord> records, TimeWindow w) {
  std::vector<EntityScore> scores;
  RawSummary summary;
  double max_function = 0.0;
  double functions = 0.0;
  double skipped = 0.0;
  for (const RawRecord* r : latest_files(records, w)) {
    const auto& f = r->as<FileMeasure>();
    if (f.function_complexities.empty()) {
      ++skipped;
      continue;
    }
    double total = 0.0;
    for (auto c : f.function_complexities) {
      total += static_cast<double>(c);
      max_function = std::max(max_function, static_cast<double>(c));
    }
    functions += static_cast<double>(f.function_complexities.size());
    const double mean = total / static_cast<double>(f.function_complexities.size());
    scores.push_back({f.path, mean, evaluate_utility(def.utility, mean)});
  }
  summary["functions"] = functions;
  summary["max_function_complexity"] = max_function;
  summary["files_without_functions"] = skipped;
  return entity_metric(def, std::move(scores), std::move(summary));
}

template <typename Base>
MetricValue per_file_density(const MetricDef& def, std::span<const RawRecord> records, TimeWindow w,
                             Base base) {
  std::vector<EntityScore> scores;
  double empty = 0.0;
  for (const RawRecord* r : latest_files(records, w)) {
    const auto& f = r->as<FileMeasure>();
    if (f.loc <= 0) {
      ++empty;
      continue;
    }
    const double b = base(f);
    scores.push_back({f.path, b, evaluate_utility(def.utility, b)});
  }
  return entity_metric(def, std::move(scores), {{"files_without_loc", empty}});
}

MetricValue fulfillment_rules(const MetricDef& def, std::span<const RawRecord> records, TimeWindow w) {
  std::vector<EntityScore> scores;
  double total = 0.0;
  double with = 0.0;
  for (const RawRecord* r : latest_files(records, w)) {
    const auto& f = r->as<FileMeasure>();
    const auto n = std::count_if(f.violations.begin(), f.violations.end(), [](const RuleViolation& v) {
      return v.severity == Severity::blocker || v.severity == Severity::critical;
    });
    total += static_cast<double>(n);
    if (n > 0) ++with;
    scores.push_back({f.path, static_cast<double>(n), evaluate_utility(def.utility, static_cast<double>(n))});
  }
  return entity_metric(def, std::move(scores),
                       {{"blocker_critical_violations", total}, {"files_with_blocker_critical", with}});
}

MetricValue test_coverage(const MetricDef& def, std::span<const RawRecord> records, TimeWindow w) {
  std::vector<EntityScore> scores;
  double uncovered = 0.0;
  for (const RawRecord* r : latest_files(records, w)) {
    const auto& f = r->as<FileMeasure>();
    if (!f.line_coverage) {
      ++uncovered;
      continue;
    }
    scores.push_back({f.path, *f.line_coverage, evaluate_utility(def.utility, *f.line_coverage)});
  }
  return entity_metric(def, std::move(scores), {{"files_without_coverage", uncovered}});
}

// --- per-run extractors ------------------------------------------------------

std::string run_label(const RawRecord& r) {
  const auto& t = r.as<TestRun>();
  std::string label = t.suite.empty() ? r.record_id : t.suite;
  if (!t.build_id.empty()) label = t.build_id + "/" + label;
  return label + " @" + format_instant(r.timestamp);
}

MetricValue passed_tests(const MetricDef& def, std::span<const RawRecord> records, TimeWindow w) {
  std::vector<EntityScore> scores;
  RawSummary summary{{"tests_total", 0}, {"tests_skipped", 0}, {"tests_errors", 0},
                     {"tests_failures", 0}, {"runs_without_base", 0}};
  for (const RawRecord* r : in_window(records, SourceKind::test_run, w)) {
    const auto& t = r->as<TestRun>();
    summary["tests_total"] += static_cast<double>(t.total);
    summary["tests_skipped"] += static_cast<double>(t.skipped);
    summary["tests_errors"] += static_cast<double>(t.errors);
    summary["tests_failures"] += static_cast<double>(t.failures);
    const auto executed = t.total - t.skipped;
    if (executed <= 0) {
      summary["runs_without_base"] += 1;
      continue;
    }
    const double density = static_cast<double>(executed - t.errors - t.failures) /
                           static_cast<double>(executed);
    scores.push_back({run_label(*r), density, evaluate_utility(def.utility, density)});
  }
  return entity_metric(def, std::move(scores), std::move(summary));
}

MetricValue fast_test_builds(const MetricDef& def, std::span<const RawRecord> records, TimeWindow w) {
  std::vector<EntityScore> scores;
  for (const RawRecord* r : in_window(records, SourceKind::test_run, w)) {
    const double d = r->as<TestRun>().duration_sec;
    scores.push_back({run_label(*r), d, evaluate_utility(def.utility, d)});
  }
  return entity_metric(def, std::move(scores), {});
}

MetricValue highly_changed_files(const MetricDef& def, std::span<const RawRecord> records, TimeWindow w) {
  std::map<std::string, std::set<std::string>> touched;
  std::size_t commits = 0;
  for (const RawRecord* r : in_window(records, SourceKind::commit, w)) {
    ++commits;
    const auto& c = r->as<CommitRecord>();
    for (const auto& f : c.files) touched[f.path].insert(c.revision);
  }
  std::vector<EntityScore> scores;
  double max_changes = 0.0;
  for (const auto& [path, revisions] : touched) {
    const double n = static_cast<double>(revisions.size());
    max_changes = std::max(max_changes, n);
    scores.push_back({path, n, evaluate_utility(def.utility, n)});
  }
  return entity_metric(def, std::move(scores),
                       {{"commits", static_cast<double>(commits)}, {"max_changes", max_changes}});
}

// --- scalar extractors -------------------------------------------------------

MetricValue non_bug_density(const MetricDef& def, std::span<const RawRecord> records, TimeWindow w) {
  const auto open = param_list(def.params, "open_statuses", {"open", "in_progress"});
  std::set<IssueStatus> open_set;
  for (const auto& s : open) {
    if (auto st = issue_status_from_string(s)) open_set.insert(*st);
  }
  std::size_t total = 0;
  std::vector<EntityScore> offenders;
  for (const RawRecord* r : latest_issue_versions(records, w.to)) {
    const auto& issue = r->as<Issue>();
    if (!is_member(issue, w)) continue;
    ++total;
    if (issue.issue_type == IssueType::bug && open_set.count(issue.status)) {
      offenders.push_back({issue.issue_id, 1.0, 0.0});
    }
  }
  RawSummary summary{{"issues", static_cast<double>(total)},
                     {"open_bugs", static_cast<double>(offenders.size())}};
  std::optional<double> base;
  if (total > 0) base = 1.0 - static_cast<double>(offenders.size()) / static_cast<double>(total);
  return scalar_metric(def, base, total, std::move(summary), std::move(offenders));
}

MetricValue errors_at_runtime(const MetricDef& def, std::span<const RawRecord> records, TimeWindow w) {
  const auto entries = in_window(records, SourceKind::log_entry, w);
  std::vector<EntityScore> offenders;
  double fatal = 0.0;
  for (const RawRecord* r : entries) {
    const auto& e = r->as<LogEntry>();
    if (e.level != LogLevel::fatal && e.level != LogLevel::error) continue;
    if (e.level == LogLevel::fatal) ++fatal;
    std::string where = e.source_file.value_or("?");
    if (e.source_line) where += ":" + std::to_string(*e.source_line);
    offenders.push_back({format_instant(r->timestamp) + " " + std::string(to_string(e.level)) + " " +
                             where + " " + e.message,
                         1.0, 0.0});
  }
  const double errors = static_cast<double>(offenders.size());
  RawSummary summary{{"log_entries", static_cast<double>(entries.size())},
                     {"critical_entries", errors},
                     {"fatal_entries", fatal}};
  std::optional<double> base;
  if (!entries.empty()) base = errors;
  return scalar_metric(def, base, entries.size(), std::move(summary), std::move(offenders));
}

MetricValue availability_uptime(const MetricDef& def, std::span<const RawRecord> records, TimeWindow w) {
  auto samples = in_window(records, SourceKind::availability_sample, w);
  std::size_t up = 0;
  std::vector<EntityScore> offenders;
  std::vector<Instant> recoveries;
  std::optional<bool> previous;
  for (const RawRecord* r : samples) {
    const bool is_up = r->as<AvailabilitySample>().up;
    if (is_up) {
      ++up;
    } else {
      offenders.push_back({format_instant(r->timestamp), 0.0, 0.0});
    }
    if (previous && !*previous && is_up) recoveries.push_back(r->timestamp);
    previous = is_up;
  }
  RawSummary summary{{"samples", static_cast<double>(samples.size())},
                     {"up_samples", static_cast<double>(up)},
                     {"failures", static_cast<double>(recoveries.size())}};
  std::optional<double> base;
  if (!samples.empty()) {
    base = 100.0 * static_cast<double>(up) / static_cast<double>(samples.size());
    summary["uptime_pct"] = *base;
  }
  if (recoveries.size() >= 2) {
    const auto span = recoveries.back() - recoveries.front();
    summary["mean_time_between_failures_sec"] =
        static_cast<double>(span.count()) / static_cast<double>(recoveries.size() - 1);
  }
  return scalar_metric(def, base, samples.size(), std::move(summary), std::move(offenders));
}

MetricValue feature_usage(const MetricDef& def, std::span<const RawRecord> records, TimeWindow w) {
  const auto catalog = param_list(def.params, "feature_catalog");
  const auto events = in_window(records, SourceKind::usage_event, w);
  std::map<std::string, std::pair<double, double>> usage;  // uses, total duration
  std::map<std::string, double> timed;
  for (const RawRecord* r : events) {
    const auto& u = r->as<UsageEvent>();
    auto& [uses, duration] = usage[u.feature];
    uses += 1;
    if (u.duration_sec) {
      duration += *u.duration_sec;
      timed[u.feature] += 1;
    }
  }
  RawSummary summary{{"usage_events", static_cast<double>(events.size())},
                     {"catalog_features", static_cast<double>(catalog.size())}};
  std::vector<EntityScore> offenders;
  std::size_t used = 0;
  for (const auto& feature : catalog) {
    auto it = usage.find(feature);
    const double uses = it == usage.end() ? 0.0 : it->second.first;
    summary["uses." + feature] = uses;
    if (it != usage.end() && timed[feature] > 0) {
      summary["avg_duration_sec." + feature] = it->second.second / timed[feature];
    }
    if (uses > 0) {
      ++used;
    } else {
      offenders.push_back({feature, 0.0, 0.0});
    }
  }
  summary["used_features"] = static_cast<double>(used);
  std::optional<double> base;
  if (!events.empty() && !catalog.empty()) {
    base = static_cast<double>(used) / static_cast<double>(catalog.size());
  }
  return scalar_metric(def, base, events.size(), std::move(summary), std::move(offenders));
}

MetricValue resolved_issues_dated(const MetricDef& def, std::span<const RawRecord> records, TimeWindow w) {
  std::size_t resolved = 0;
  std::size_t dated = 0;
  std::vector<EntityScore> offenders;
  for (const RawRecord* r : latest_issue_versions(records, w.to)) {
    const auto& issue = r->as<Issue>();
    if (!issue.resolved || !w.contains(*issue.resolved)) continue;
    ++resolved;
    if (issue.due_date || issue.iteration || issue.release) {
      ++dated;
    } else {
      offenders.push_back({issue.issue_id, 0.0, 0.0});
    }
  }
  RawSummary summary{{"resolved_issues", static_cast<double>(resolved)},
                     {"dated_issues", static_cast<double>(dated)}};
  std::optional<double> base;
  if (resolved > 0) base = static_cast<double>(dated) / static_cast<double>(resolved);
  return scalar_metric(def, base, resolved, std::move(summary), std::move(offenders));
}

bool has_field(const Issue& issue, const std::string& field) {
  if (field == "description") return issue.description.has_value();
  if (field == "due_date") return issue.due_date.has_value();
  if (field == "assignee") return issue.assignee.has_value();
  if (field == "estimate_hours") return issue.estimate_hours.has_value();
  if (field == "iteration") return issue.iteration.has_value();
  if (field == "release") return issue.release.has_value();
  if (field == "resolved") return issue.resolved.has_value();
  throw std::invalid_argument("unknown issue field '" + field + "' in required_fields");
}

MetricValue issues_completely_specified(const MetricDef& def, std::span<const RawRecord> records,
                                        TimeWindow w) {
  const auto required = param_list(def.params, "required_fields",
                                   {"description", "due_date", "assignee", "estimate_hours"});
  std::size_t total = 0;
  std::vector<EntityScore> offenders;
  for (const RawRecord* r : latest_issue_versions(records, w.to)) {
    const auto& issue = r->as<Issue>();
    if (!is_member(issue, w)) continue;
    ++total;
    double missing = 0.0;
    for (const auto& f : required) {
      if (!has_field(issue, f)) ++missing;
    }
    if (missing > 0) offenders.push_back({issue.issue_id, missing, 0.0});
  }
  RawSummary summary{{"issues", static_cast<double>(total)},
                     {"incomplete_issues", static_cast<double>(offenders.size())}};
  std::optional<double> base;
  if (total > 0) base = 1.0 - static_cast<double>(offenders.size()) / static_cast<double>(total);
  return scalar_metric(def, base, total, std::move(summary), std::move(offenders));
}

}  // namespace

TimeWindow record_query_window(const MetricDef& def, TimeWindow window) {
  if (def.source_kind == SourceKind::issue) return {TimeWindow::everything().from, window.to};
  return window;
}

TimeWindow effective_window(const MetricDef& def, TimeWindow request) {
  if (def.window_days) return TimeWindow::trailing_days(request.to, *def.window_days);
  return request;
}

std::vector<const RawRecord*> latest_issue_versions(std::span<const RawRecord> issues, Instant as_of) {
  std::map<std::string, const RawRecord*> latest;
  for (const auto& r : issues) {
    if (r.kind() != SourceKind::issue || !(r.timestamp < as_of)) continue;
    const auto& issue = r.as<Issue>();
    auto [it, fresh] = latest.try_emplace(issue.issue_id, &r);
    if (fresh) continue;
    const auto& held = it->second->as<Issue>();
    if (held.updated < issue.updated ||
        (held.updated == issue.updated && it->second->record_id < r.record_id)) {
      it->second = &r;
    }
  }
  std::vector<const RawRecord*> out;
  for (const auto& [id, r] : latest) out.push_back(r);
  return out;
}

std::optional<double> mean_utility(std::span<const EntityScore> scores) {
  if (scores.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& s : scores) sum += s.utility;
  return std::clamp(sum / static_cast<double>(scores.size()), 0.0, 1.0);
}

std::vector<Offender> select_offenders(std::vector<EntityScore> scores, std::size_t top_n) {
  std::erase_if(scores, [](const EntityScore& s) { return s.utility >= kFullUtility; });
  std::sort(scores.begin(), scores.end(), [](const EntityScore& a, const EntityScore& b) {
    if (a.utility != b.utility) return a.utility < b.utility;
    if (a.base_value != b.base_value) return a.base_value > b.base_value;
    return a.entity < b.entity;
  });
  if (scores.size() > top_n) scores.resize(top_n);
  std::vector<Offender> out;
  out.reserve(scores.size());
  for (auto& s : scores) out.push_back({std::move(s.entity), s.base_value, s.utility});
  return out;
}

MetricValue compute_assessed_metric(const MetricDef& def, std::span<const RawRecord> records,
                                    TimeWindow window) {
  const ExtractorSpec* spec = find_extractor(def.extractor);
  if (!spec) throw std::invalid_argument("unknown extractor '" + def.extractor + "'");
  if (spec->source_kind != def.source_kind) {
    throw std::invalid_argument("metric " + def.id + ": payload kind mismatch for extractor " + spec->id);
  }
  for (const auto& key : spec->required_params()) {
    if (def.params.find(key) == def.params.end()) {
      throw std::invalid_argument("metric " + def.id + ": missing param " + key);
    }
  }
  const std::string& x = def.extractor;
  if (x == "non_complex_files") return non_complex_files(def, records, window);
  if (x == "commented_files") {
    return per_file_density(def, records, window, [](const FileMeasure& f) {
      return 100.0 * static_cast<double>(f.comment_lines) / static_cast<double>(f.loc);
    });
  }
  if (x == "absence_of_duplications") {
    return per_file_density(def, records, window, [](const FileMeasure& f) {
      return 100.0 * static_cast<double>(f.duplicated_lines) / static_cast<double>(f.loc);
    });
  }
  if (x == "fulfillment_critical_blocker_rules") return fulfillment_rules(def, records, window);
  if (x == "highly_changed_files") return highly_changed_files(def, records, window);
  if (x == "passed_tests") return passed_tests(def, records, window);
  if (x == "fast_test_builds") return fast_test_builds(def, records, window);
  if (x == "test_coverage") return test_coverage(def, records, window);
  if (x == "non_bug_density") return non_bug_density(def, records, window);
  if (x == "errors_at_runtime") return errors_at_runtime(def, records, window);
  if (x == "availability_uptime") return availability_uptime(def, records, window);
  if (x == "feature_usage") return feature_usage(def, records, window);
  if (x == "resolved_issues_dated") return resolved_issues_dated(def, records, window);
  if (x == "issues_completely_specified") return issues_completely_specified(def, records, window);
  throw std::invalid_argument("extractor '" + x + "' has no implementation");
}

namespace {

MetricDef catalog_def(const char* extractor, Params params) {
  const ExtractorSpec* spec = find_extractor(extractor);
  MetricDef def;
  def.id = extractor;
  def.extractor = extractor;
  def.source_kind = spec->source_kind;
  def.params = with_default_params(*spec, std::move(params));
  def.utility = spec->default_utility(def.params);
  return def;
}

}  // namespace

MetricValue compute_non_bug_density(std::span<const RawRecord> issues, TimeWindow window,
                                    const std::vector<std::string>& open_statuses) {
  return compute_assessed_metric(catalog_def("non_bug_density", {{"open_statuses", open_statuses}}),
                                 issues, window);
}

MetricValue compute_highly_changed(std::span<const RawRecord> commits, TimeWindow window,
                                   double change_limit) {
  return compute_assessed_metric(catalog_def("highly_changed_files", {{"change_limit", change_limit}}),
                                 commits, window);
}

MetricValue compute_availability(std::span<const RawRecord> samples, TimeWindow window,
                                 double floor_pct, double goal_pct) {
  return compute_assessed_metric(
      catalog_def("availability_uptime", {{"floor_pct", floor_pct}, {"goal_pct", goal_pct}}), samples,
      window);
}

}  // namespace qgauge
