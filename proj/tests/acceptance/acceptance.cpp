// Acceptance suite: one pass/fail line per criterion.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include <httplib.h>

#include "qgauge/alerts.hpp"
#include "qgauge/assessment.hpp"
#include "qgauge/catalog.hpp"
#include "qgauge/commands.hpp"
#include "qgauge/ingestion.hpp"
#include "qgauge/logging.hpp"
#include "qgauge/metrics.hpp"
#include "qgauge/service.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace qgauge;
using namespace qgauge::testing;

namespace {

struct Failure {
  std::string what;
};

void check(bool ok, const std::string& what) {
  if (!ok) throw Failure{what};
}

void check_near(double actual, double expected, double tol, const std::string& what) {
  if (!(std::fabs(actual - expected) <= tol)) {
    std::ostringstream s;
    s.precision(17);
    s << what << ": got " << actual << ", expected " << expected;
    throw Failure{s.str()};
  }
}

struct Criterion {
  int number;
  std::string title;
  double budget_sec;
  std::function<std::string()> body;
};

// --- 1 ---------------------------------------------------------------------

std::string utility_anchors() {
  const UtilityFunction u = PiecewiseLinear{{{0.0, 1.0}, {10.0, 0.0}}};
  check_near(evaluate_utility(u, 0.0), 1.0, 1e-12, "U(0)");
  check_near(evaluate_utility(u, 6.0), 0.4, 1e-12, "U(6)");
  check_near(evaluate_utility(u, 10.0), 0.0, 1e-12, "U(10)");
  check_near(evaluate_utility(u, 15.0), 0.0, 1e-12, "U(15)");
  return "U(0)=1, U(6)=0.4, U(10)=0, U(15)=0";
}

// --- 2 ---------------------------------------------------------------------

std::vector<RawRecord> fixture_files_named(const std::vector<RawRecord>& all, const std::string& path) {
  std::vector<RawRecord> out;
  for (const auto& r : all) {
    if (r.as<FileMeasure>().path == path) out.push_back(r);
  }
  return out;
}

std::string table_defaults() {
  const QualityModel model = demo_model();
  const MetricDef* complexity = model.find_metric("non_complex_files");
  const MetricDef* comments = model.find_metric("commented_files");
  check(complexity && comments, "demo model lacks the complexity or comment metric");
  check(param_number(complexity->params, "complexity_threshold", -1) == 10.0, "complexity threshold is not 10");
  check(param_number(comments->params, "comment_min_pct", -1) == 10.0, "comment band lower bound is not 10");
  check(param_number(comments->params, "comment_max_pct", -1) == 30.0, "comment band upper bound is not 30");

  const auto parsed = parse_static_analysis_export(read_text(fixture_path("static.json")));
  const TimeWindow w{at("2018-01-01"), at("2018-02-01")};
  auto value_for = [&](const MetricDef& def, const std::string& path) {
    const auto records = fixture_files_named(parsed.records, path);
    check(records.size() == 1, "fixture lacks " + path);
    const auto v = compute_assessed_metric(def, records, w).value;
    check(v.has_value(), def.id + " has no value for " + path);
    return *v;
  };
  // parser.cpp: nine functions of CC 10 and one of 9, mean 9.9; 40/400 = 10% comments.
  // lexer.cpp: three functions of CC 10, mean 10.0; 90/300 = 30% comments.
  check(value_for(*complexity, "src/core/parser.cpp") == 1.0, "mean CC 9.9 is not non-complex");
  check(value_for(*complexity, "src/core/lexer.cpp") == 0.0, "mean CC 10.0 counts as non-complex");
  check(value_for(*comments, "src/core/parser.cpp") == 1.0, "10% comment density does not score 1.0");
  check(value_for(*comments, "src/core/lexer.cpp") == 1.0, "30% comment density does not score 1.0");
  return "threshold 10, band 10-30%; CC 9.9 -> 1, CC 10.0 -> 0, 10% -> 1, 30% -> 1";
}

// --- 3 ---------------------------------------------------------------------

MetricDef catalog_metric(const std::string& extractor, Params params) {
  const ExtractorSpec* spec = find_extractor(extractor);
  MetricDef def;
  def.id = extractor;
  def.extractor = extractor;
  def.source_kind = spec->source_kind;
  def.params = with_default_params(*spec, std::move(params));
  def.utility = spec->default_utility(def.params);
  return def;
}

std::string step_proportions() {
  std::mt19937_64 rng(20180115);
  const TimeWindow w{at("2018-01-01"), at("2018-01-15")};
  const Instant ts = at("2018-01-05T12:00:00Z");
  const char* extractors[] = {"non_complex_files", "absence_of_duplications", "fulfillment_critical_blocker_rules",
                              "highly_changed_files", "fast_test_builds"};
  std::uniform_int_distribution<int> entity_count(1, 100);
  std::size_t checked = 0;
  for (int dataset = 0; dataset < 1000; ++dataset) {
    const std::string extractor = extractors[dataset % 5];
    const int n = entity_count(rng);
    const int threshold = std::uniform_int_distribution<int>(1, 12)(rng);
    std::vector<RawRecord> records;
    std::size_t good = 0;
    std::size_t entities = 0;
    MetricDef def;

    if (extractor == "non_complex_files") {
      def = catalog_metric(extractor, {{"complexity_threshold", double(threshold)}});
      for (int i = 0; i < n; ++i) {
        FileMeasure f;
        f.path = "f" + std::to_string(i);
        f.loc = 100;
        const int functions = std::uniform_int_distribution<int>(1, 8)(rng);
        long sum = 0;
        for (int k = 0; k < functions; ++k) {
          f.function_complexities.push_back(std::uniform_int_distribution<int>(1, 2 * threshold)(rng));
          sum += f.function_complexities.back();
        }
        good += sum < static_cast<long>(threshold) * functions;
        ++entities;
        records.push_back({"r" + std::to_string(i), "default", ts, f});
      }
    } else if (extractor == "absence_of_duplications") {
      def = catalog_metric(extractor, {{"dup_threshold_pct", double(threshold)}});
      for (int i = 0; i < n; ++i) {
        FileMeasure f;
        f.path = "f" + std::to_string(i);
        f.loc = std::uniform_int_distribution<int>(1, 5000)(rng);
        f.duplicated_lines = std::uniform_int_distribution<long>(0, f.loc / 4)(rng);
        good += 100 * f.duplicated_lines < threshold * f.loc;
        ++entities;
        records.push_back({"r" + std::to_string(i), "default", ts, f});
      }
    } else if (extractor == "fulfillment_critical_blocker_rules") {
      def = catalog_metric(extractor, {});
      const Severity severities[] = {Severity::blocker, Severity::critical, Severity::major, Severity::minor,
                                     Severity::info};
      for (int i = 0; i < n; ++i) {
        FileMeasure f;
        f.path = "f" + std::to_string(i);
        f.loc = 10;
        const int violations = std::uniform_int_distribution<int>(0, 4)(rng);
        bool severe = false;
        for (int k = 0; k < violations; ++k) {
          const Severity s = severities[std::uniform_int_distribution<int>(0, 4)(rng)];
          severe = severe || s == Severity::blocker || s == Severity::critical;
          f.violations.push_back({"rule", s, std::nullopt});
        }
        good += !severe;
        ++entities;
        records.push_back({"r" + std::to_string(i), "default", ts, f});
      }
    } else if (extractor == "highly_changed_files") {
      def = catalog_metric(extractor, {{"change_limit", double(threshold)}});
      const int commits = std::uniform_int_distribution<int>(1, 60)(rng);
      std::map<std::string, std::set<int>> touched;
      for (int c = 0; c < commits; ++c) {
        CommitRecord commit;
        commit.revision = "c" + std::to_string(c);
        for (int i = 0; i < n; ++i) {
          if (std::uniform_int_distribution<int>(0, 9)(rng) == 0) {
            commit.files.push_back({"f" + std::to_string(i), 1, 1});
            touched["f" + std::to_string(i)].insert(c);
          }
        }
        records.push_back({commit.revision, "default", ts + std::chrono::seconds(c), commit});
      }
      for (const auto& [path, revs] : touched) good += static_cast<int>(revs.size()) < threshold;
      entities = touched.size();
    } else {
      def = catalog_metric(extractor, {{"duration_limit_sec", double(threshold * 50)}});
      for (int i = 0; i < n; ++i) {
        TestRun t;
        t.suite = "s" + std::to_string(i);
        t.total = 1;
        t.duration_sec = std::uniform_int_distribution<int>(0, 2 * threshold * 50)(rng);
        good += t.duration_sec < threshold * 50;
        ++entities;
        records.push_back({"r" + std::to_string(i), "default", ts, t});
      }
    }

    const MetricValue mv = compute_assessed_metric(def, records, w);
    if (entities == 0) {
      check(!mv.value.has_value(), extractor + ": expected no-data without entities");
    } else {
      check(mv.value.has_value(), extractor + ": missing value");
      const double expected = static_cast<double>(good) / static_cast<double>(entities);
      check(*mv.value == expected, extractor + " dataset " + std::to_string(dataset) + ": value " +
                                       std::to_string(*mv.value) + " != proportion " + std::to_string(expected));
    }
    ++checked;
  }
  return std::to_string(checked) + " datasets, exact equality";
}

// --- 4 ---------------------------------------------------------------------

std::string aggregation_oracle() {
  std::mt19937_64 rng(42);
  std::size_t parents = 0;
  for (int i = 0; i < 1000; ++i) {
    const RandomDag dag = random_dag(rng, 30);
    check(validate_model(dag.model).empty(), "random model " + std::to_string(i) + " is invalid");
    std::map<std::string, MetricValue> values;
    for (const auto& [id, v] : dag.metric_values) values[id] = MetricValue{id, v, 0, {}, {}};
    const Snapshot snap = assemble_snapshot(dag.model, values, {at("2018-01-01"), at("2018-01-15")},
                                            at("2018-01-15"));
    const ValueMap expected = brute_force_evaluate(dag.model, dag.metric_values);
    for (const auto& [id, entry] : snap.entries) {
      const auto& want = expected.at(id);
      check(entry.value.has_value() == want.has_value(), "no-data mismatch at " + id);
      if (!entry.value) continue;
      check(*entry.value >= 0.0 && *entry.value <= 1.0, id + " outside [0,1]");
      check_near(*entry.value, *want, 1e-9, "DAG " + std::to_string(i) + " element " + id);
      if (entry.stratum != Stratum::metric) ++parents;
    }
  }
  return "1000 DAGs, " + std::to_string(parents) + " parent values within 1e-9";
}

// --- 5 ---------------------------------------------------------------------

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

std::string demo_scenario() {
  TempDir dir;
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::cmd_demo(dir.path(), {out, err});
  check(code == 0, "qgauge demo exited with " + std::to_string(code) + ": " + err.str());
  check(count_occurrences(out.str(), "ALERT maintainability green→orange") == 1,
        "demo output does not contain exactly one maintainability green→orange alert");

  Store store(dir / "store", Store::Mode::read_only);
  const auto snapshots = store.query_snapshots(TimeWindow::everything());
  check(snapshots.size() == 2, "expected 2 snapshots, found " + std::to_string(snapshots.size()));
  const Snapshot& first = snapshots[0];
  const Snapshot& second = snapshots[1];
  check(first.find("maintainability")->color == Color::green, "window 1 maintainability is not green");
  for (const auto& [id, e] : first.entries) check_near(e.value.value_or(-1), 1.0, 1e-9, "window 1 " + id);

  const auto expected = demo_window2_expected();
  check(expected.size() == second.entries.size(), "window 2 element count differs from the oracle");
  for (const auto& [id, want] : expected) {
    const SnapshotEntry* e = second.find(id);
    check(e && e->value, "window 2 lacks a value for " + id);
    check_near(*e->value, want, 1e-9, "window 2 " + id);
  }
  check(second.find("maintainability")->color == Color::orange, "window 2 maintainability is not orange");

  std::size_t maintainability_alerts = 0;
  for (const auto& a : store.query_alerts()) {
    if (a.element_id != "maintainability") continue;
    ++maintainability_alerts;
    check(a.previous_color == Color::green && a.new_color == Color::orange &&
              a.threshold_crossed == ThresholdCrossed::warning,
          "maintainability alert is not green→orange (warning)");
  }
  check(maintainability_alerts == 1, "expected one maintainability alert, found " +
                                         std::to_string(maintainability_alerts));

  const DrilldownNode root = drilldown(second, "maintainability", demo_model());
  check(!root.children.empty() && root.children.front().element_id == "blocking_code",
        "blocking_code is not the worst child of maintainability");
  std::set<std::string> blocked;
  std::set<std::string> churned;
  for (const auto& leaf : root.children.front().children) {
    for (const auto& o : leaf.offenders) {
      (leaf.element_id == "fulfillment_critical_blocker_rules" ? blocked : churned).insert(o.entity);
    }
  }
  const std::set<std::string> want_blocked{"src/billing/Export.java", "src/billing/Invoice.java",
                                           "src/billing/Ledger.java", "src/billing/TaxRules.java"};
  check(blocked == want_blocked, "fulfillment offenders differ from the four files with blocker/critical issues");
  check(churned == std::set<std::string>{"src/billing/Invoice.java"}, "highly-changed offenders differ");
  return "window 1 green, window 2 maintainability 0.6667 orange, one maintainability alert, blocking_code worst with 4+1 offending files";
}

// --- 6 ---------------------------------------------------------------------

std::string determinism() {
  TempDir dir;
  const QualityModel model = demo_model();
  std::map<std::string, std::string> bytes_after_first;
  Snapshot first;
  {
    Store store(dir / "store");
    ingest_demo_window(store, 1);
    ingest_demo_window(store, 2);
    const std::size_t raw = store.raw_count();
    ingest_demo_window(store, 1);
    ingest_demo_window(store, 2);
    check(store.raw_count() == raw, "re-ingesting identical inputs added raw records");

    Engine engine(model, store);
    first = engine.run_assessment({demo_window(2), Trigger::manual}, demo_window(2).to).snapshot;
    const Snapshot again = engine.run_assessment({demo_window(2), Trigger::manual}, demo_window(2).to).snapshot;
    check(same_values(first, again), "two assessments over identical inputs differ");
    check(first.snapshot_id != again.snapshot_id, "snapshot ids are not unique");
  }
  bytes_after_first = directory_bytes(dir / "store");
  bytes_after_first.erase(".lock");
  {
    Store reopened(dir / "store", Store::Mode::read_only);
    const auto stored = reopened.find_snapshot(first.snapshot_id);
    check(stored.has_value() && *stored == first, "snapshot changed across close/reopen");
    const Snapshot recomputed = evaluate(model, reopened, demo_window(2), demo_window(2).to);
    check(same_values(recomputed, first), "re-evaluation after reopen differs");
  }
  {
    Store reopened(dir / "store");
    check(reopened.snapshot_count() == 2, "snapshot count changed across reopen");
  }
  auto bytes_after_reopen = directory_bytes(dir / "store");
  bytes_after_reopen.erase(".lock");
  check(bytes_after_reopen == bytes_after_first, "store files changed across close/reopen");
  return "re-ingest adds 0 records, snapshots value-identical, store bytes unchanged across reopen";
}

// --- 7 ---------------------------------------------------------------------

std::string parser_fixtures() {
  {
    const auto r = parse_test_report_xml(read_text(fixture_path("junit.xml")));
    check(r.records.size() == 3 && r.warnings.empty(), "junit.xml: expected 3 runs without warnings");
    const auto& a = r.records[0].as<TestRun>();
    check(a.suite == "core.ParserTest" && a.build_id == "build-42" && a.total == 12 && a.failures == 1 &&
              a.errors == 0 && a.skipped == 2 && a.duration_sec == 3.25,
          "junit.xml: core.ParserTest fields");
    check(r.records[0].timestamp == at("2018-01-10T02:00:00Z"), "junit.xml: root timestamp");
    const auto& b = r.records[1].as<TestRun>();
    check(b.suite == "integration.StoreIT" && b.total == 5 && b.errors == 1 && b.duration_sec == 41.5,
          "junit.xml: integration.StoreIT fields");
    check(r.records[1].timestamp == at("2018-01-10T02:05:00Z"), "junit.xml: suite timestamp");
    const auto& c = r.records[2].as<TestRun>();
    check(c.suite == "integration.ApiIT" && c.total == 3 && c.failures == 2 && c.duration_sec == 120.0,
          "junit.xml: integration.ApiIT fields");
  }
  {
    const auto r = parse_commit_log(read_text(fixture_path("commits.log")));
    check(r.records.size() == 4 && r.warnings.empty(), "commits.log: expected 4 commits");
    const auto& first = r.records[0].as<CommitRecord>();
    check(first.revision == "a1b2c3d" && first.files.size() == 2 && first.files[0].lines_added == 10 &&
              first.files[0].lines_deleted == 2 && first.files[1].path == "src/core/parser.hpp",
          "commits.log: a1b2c3d");
    const auto& second = r.records[1].as<CommitRecord>();
    check(second.author == "Bob Roe <bob@example.org>" && second.files[0].path == "assets/logo.png" &&
              second.files[0].lines_added == 0 && second.files[1].lines_deleted == 25,
          "commits.log: e4f5a6b");
    check(r.records[1].timestamp == at("2018-01-09T13:30:00Z"), "commits.log: offset folded into UTC");
    check(r.records[2].as<CommitRecord>().files.empty(), "commits.log: c7d8e9f has no files");
  }
  {
    const auto r = parse_static_analysis_export(read_text(fixture_path("static.json")));
    check(r.records.size() == 4 && r.warnings.size() == 1 && r.skipped == 1,
          "static.json: expected 4 files and 1 skipped entry");
    const auto& parser = r.records[0].as<FileMeasure>();
    check(parser.path == "src/core/parser.cpp" && parser.loc == 400 && parser.comment_lines == 40 &&
              parser.function_complexities.size() == 10 && parser.violations.size() == 2 &&
              parser.violations[1].severity == Severity::blocker && parser.line_coverage == 91.5,
          "static.json: parser.cpp");
    const auto& lexer = r.records[1].as<FileMeasure>();
    check(lexer.duplicated_lines == 30 && lexer.violations[0].severity == Severity::critical &&
              !lexer.violations[1].type.has_value(),
          "static.json: lexer.cpp");
    check(r.records[2].as<FileMeasure>().path == "src/core/ast.hpp", "static.json: flat entry");
    check(r.records[0].timestamp == at("2018-01-12T06:00:00Z"), "static.json: analysis timestamp");
  }
  {
    const auto r = parse_issue_csv(read_text(fixture_path("issues.csv")));
    check(r.records.size() == 5 && r.warnings.size() == 1, "issues.csv: expected 5 issues and 1 warning");
    const auto& qr1 = r.records[0].as<Issue>();
    check(qr1.issue_id == "QR-1" && qr1.issue_type == IssueType::bug && qr1.status == IssueStatus::open &&
              qr1.description == std::optional<std::string>("Crash on empty input, reproducible") &&
              qr1.estimate_hours == 3.0,
          "issues.csv: QR-1");
    const auto& qr2 = r.records[1].as<Issue>();
    check(qr2.issue_type == IssueType::feature && qr2.status == IssueStatus::done &&
              qr2.iteration == std::optional<std::string>("Sprint 1") &&
              qr2.description == std::optional<std::string>("Import \"legacy\" format") &&
              qr2.resolved == at("2018-01-09"),
          "issues.csv: QR-2");
    const auto& qr4 = r.records[3].as<Issue>();
    check(qr4.issue_type == IssueType::bug && qr4.status == IssueStatus::done &&
              qr4.release == std::optional<std::string>("1.0.1"),
          "issues.csv: QR-4 aliases");
    check(r.records[4].as<Issue>().issue_id == "QR-6", "issues.csv: QR-5 skipped");
  }
  {
    const auto r = parse_log_lines(read_text(fixture_path("app.log")), LogPattern::default_pattern());
    check(r.records.size() == 6 && r.skipped == 2, "app.log: expected 6 entries and 2 unmatched lines");
    std::size_t errors = 0;
    for (const auto& rec : r.records) {
      const auto level = rec.as<LogEntry>().level;
      errors += level == LogLevel::error || level == LogLevel::fatal;
    }
    check(errors == 3, "app.log: expected 3 error/fatal entries");
    const auto& db = r.records[2].as<LogEntry>();
    check(db.level == LogLevel::error && db.source_file == std::optional<std::string>("src/db.cpp") &&
              db.source_line == std::optional<std::int64_t>(301) && db.message == "connection refused",
          "app.log: db.cpp entry");
    check(r.records[3].timestamp == at("2018-01-10T07:02:00Z"), "app.log: offset folded into UTC");
  }
  {
    bool rejected = false;
    try {
      parse_test_report_xml(read_text(fixture_path("garbage.bin")));
    } catch (const IngestError&) {
      rejected = true;
    }
    check(rejected, "garbage.bin accepted as a test report");
  }
  return "junit 3, commits 4, static 4 (+1 skipped), issues 5 (+1 skipped), logs 6 (+2 unmatched), garbage rejected";
}

// --- 8 ---------------------------------------------------------------------

std::string api_purity() {
  TempDir dir;
  const QualityModel model = demo_model();
  Store store(dir / "store");
  ingest_demo_window(store, 1);
  ingest_demo_window(store, 2);
  Engine engine(model, store);
  engine.run_assessment({demo_window(1), Trigger::manual}, demo_window(1).to);
  const Snapshot persisted = engine.run_assessment({demo_window(2), Trigger::manual}, demo_window(2).to).snapshot;

  ApiHandler::Options options;
  options.clock = [] { return at("2018-01-29"); };
  ApiHandler handler(engine, options);
  ApiServer server(handler);
  const int port = server.bind("127.0.0.1", 0);
  std::thread serving([&] { server.run(); });
  httplib::Client client("127.0.0.1", port);
  for (int i = 0; i < 200 && !server.running(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));

  auto before = directory_bytes(dir / "store");
  struct Call {
    const char* path;
    int status;
  };
  const Call reads[] = {{"/health", 200},
                        {"/assessment/current", 200},
                        {"/assessment/history?element=maintainability", 200},
                        {"/drilldown/maintainability", 200},
                        {"/alerts?limit=5", 200},
                        {"/model", 200},
                        {"/drilldown/nope", 404},
                        {"/assessment/history?element=maintainability&from=garbage", 400}};
  std::string failure;
  for (const auto& call : reads) {
    auto res = client.Get(call.path);
    if (!res || res->status != call.status) {
      failure = std::string("GET ") + call.path + " returned " + (res ? std::to_string(res->status) : "nothing");
      break;
    }
  }
  nlohmann::json whatif;
  if (failure.empty()) {
    const std::string delta = R"({"weights": [
        {"parent": "blocking_code", "child": "fulfillment_critical_blocker_rules", "weight": 0.8},
        {"parent": "blocking_code", "child": "highly_changed_files", "weight": 0.2}],
      "from": "2018-01-15", "to": "2018-01-29"})";
    auto res = client.Post("/whatif", delta, "application/json");
    if (!res || res->status != 200) {
      failure = "POST /whatif returned " + (res ? std::to_string(res->status) + " " + res->body : "nothing");
    } else {
      whatif = nlohmann::json::parse(res->body);
    }
  }
  auto current = client.Get("/assessment/current");
  server.stop();
  serving.join();
  check(failure.empty(), failure);
  check(directory_bytes(dir / "store") == before, "store files changed during read-only requests and what-if");
  check(current && snapshot_from_json(nlohmann::json::parse(current->body)) == persisted,
        "persisted snapshot changed after what-if");
  check(whatif.value("transient", false), "what-if snapshot is not marked transient");

  // Oracle: cmd_assess under the delta-applied model, on a copy of the store.
  WhatIfDelta delta;
  delta.weights = {{"blocking_code", "fulfillment_critical_blocker_rules", 0.8},
                   {"blocking_code", "highly_changed_files", 0.2}};
  write_text(dir / "whatif-model.json", serialize_model(apply_delta(model, delta)));
  fs::copy(dir / "store", dir / "store-copy", fs::copy_options::recursive);
  fs::remove(dir / "store-copy" / ".lock");
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::cmd_assess(dir / "whatif-model.json", dir / "store-copy",
                                   {std::nullopt, std::string("2018-01-15"), std::string("2018-01-29")}, true,
                                   {out, err});
  check(code == 0, "cmd_assess failed: " + err.str());
  const Snapshot oracle = snapshot_from_json(nlohmann::json::parse(out.str()).at("snapshot"));
  const Snapshot transient = snapshot_from_json(whatif);
  check(oracle.entries.size() == transient.entries.size(), "what-if element set differs");
  for (const auto& [id, e] : oracle.entries) {
    const SnapshotEntry* t = transient.find(id);
    check(t && t->value.has_value() == e.value.has_value(), "what-if no-data mismatch at " + id);
    if (e.value) check_near(*t->value, *e.value, 1e-9, "what-if " + id);
  }
  const double blocking = 0.8 * 0.2 + 0.2 * (2.0 / 3);
  check_near(*transient.find("blocking_code")->value, blocking, 1e-9, "what-if blocking_code");
  return "8 read requests + what-if left store bytes unchanged; what-if matches cmd_assess within 1e-9";
}

}  // namespace

int main() {
  configure_logging("warn");
  const std::vector<Criterion> criteria = {
      {1, "utility anchors", 1.0, utility_anchors},
      {2, "default thresholds", 10.0, table_defaults},
      {3, "step-proportion oracle", 10.0, step_proportions},
      {4, "aggregation oracle", 10.0, aggregation_oracle},
      {5, "two-window demo scenario", 30.0, demo_scenario},
      {6, "determinism and idempotence", 60.0, determinism},
      {7, "parser fixtures", 10.0, parser_fixtures},
      {8, "API purity and what-if", 60.0, api_purity},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    try {
      detail = c.body();
    } catch (const Failure& f) {
      ok = false;
      detail = f.what;
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string("exception: ") + e.what();
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (ok && elapsed > c.budget_sec) {
      ok = false;
      detail += " (took " + std::to_string(elapsed) + " s, budget " + std::to_string(c.budget_sec) + " s)";
    }
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.3fs", elapsed);
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << "AC" << c.number << " " << c.title << ": " << detail << " ("
              << timing << ")" << std::endl;
    failed += !ok;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
