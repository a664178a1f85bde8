#include <gtest/gtest.h>

#include "qgauge/records.hpp"
#include "support/fixtures.hpp"

using namespace qgauge;
using qgauge::testing::at;

TEST(RecordId, IsSha256HexPrefixOverSeparatedParts) {
  EXPECT_EQ(derive_record_id({"commit", "a1b2c3d"}), "73d051437ff555c0a137bcc3");
  EXPECT_EQ(derive_record_id({""}), "e3b0c44298fc1c149afbf4c8");
  EXPECT_NE(derive_record_id({"ab", "c"}), derive_record_id({"a", "bc"}));
}

TEST(Records, JsonRoundTripForEveryKind) {
  Issue issue;
  issue.issue_id = "QR-1";
  issue.issue_type = IssueType::bug;
  issue.status = IssueStatus::in_progress;
  issue.created = at("2018-01-01");
  issue.updated = at("2018-01-02");
  issue.resolved = at("2018-01-03");
  issue.estimate_hours = 2.5;
  issue.description = "x";
  const std::vector<Payload> payloads = {
      FileMeasure{"a.cpp", 10, 2, 1, {1, 2}, {{"r", Severity::major, ViolationType::bug}}, 50.0, std::nullopt},
      CommitRecord{"abc", "me", {{"a.cpp", 1, 2}}},
      TestRun{"b1", "suite", 4, 1, 1, 1, 2.5},
      issue,
      LogEntry{LogLevel::error, "a.cpp", 3, "boom"},
      UsageEvent{"search", 1.5},
      AvailabilitySample{false},
  };
  for (const auto& p : payloads) {
    const RawRecord r{"id-" + std::to_string(p.index()), "proj", at("2018-01-05T10:00:00Z"), p};
    EXPECT_TRUE(record_problems(r).empty());
    EXPECT_EQ(record_from_json(record_to_json(r)), r) << record_to_json(r).dump();
  }
}

TEST(Records, MissingIdIsDerivedFromContent) {
  const auto j = nlohmann::json::parse(
      R"({"source_kind": "usage_event", "timestamp": "2018-01-10T09:00:00Z", "feature": "search"})");
  const RawRecord a = record_from_json(j);
  const RawRecord b = record_from_json(j);
  EXPECT_EQ(a.record_id.size(), 24u);
  EXPECT_EQ(a.record_id, b.record_id);
  auto other = j;
  other["feature"] = "export";
  EXPECT_NE(record_from_json(other).record_id, a.record_id);
  EXPECT_EQ(a.project, "default");
  EXPECT_EQ(a.kind(), SourceKind::usage_event);
}

TEST(Records, MalformedDocumentsThrow) {
  using nlohmann::json;
  EXPECT_THROW(record_from_json(json::array()), RecordError);
  EXPECT_THROW(record_from_json(json{{"source_kind", "telemetry"}, {"timestamp", "2018-01-01"}}), RecordError);
  EXPECT_THROW(record_from_json(json{{"source_kind", "usage_event"}}), RecordError);
  EXPECT_THROW(record_from_json(json{{"source_kind", "usage_event"}, {"timestamp", "yesterday"}, {"feature", "x"}}),
               RecordError);
  EXPECT_THROW(record_from_json(json{{"source_kind", "usage_event"}, {"timestamp", "2018-01-01"}, {"payload", 3}}),
               RecordError);
}

TEST(Records, InvariantProblems) {
  RawRecord r{"x", "default", at("2018-01-01"), TestRun{"", "s", 3, 2, 2, 0, 1.0}};
  EXPECT_EQ(record_problems(r), std::vector<std::string>{"errors + failures + skipped exceeds total"});
  r.payload = FileMeasure{"a", 5, 10, 0, {}, {}, std::nullopt, std::nullopt};
  EXPECT_FALSE(record_problems(r).empty());
  r.payload = FileMeasure{"a", 5, 1, 0, {}, {}, 120.0, std::nullopt};
  EXPECT_FALSE(record_problems(r).empty());
  Issue backwards;
  backwards.issue_id = "I";
  backwards.created = at("2018-01-05");
  backwards.updated = at("2018-01-04");
  r.payload = backwards;
  EXPECT_EQ(record_problems(r), std::vector<std::string>{"updated precedes created"});
  r.record_id.clear();
  r.payload = AvailabilitySample{true};
  EXPECT_EQ(record_problems(r), std::vector<std::string>{"record_id is empty"});
}

TEST(Records, VocabularyIsLenient) {
  EXPECT_EQ(severity_from_string("BLOCKER"), Severity::blocker);
  EXPECT_EQ(violation_type_from_string("CODE_SMELL"), ViolationType::code_smell);
  EXPECT_EQ(issue_type_from_string("Defect"), IssueType::bug);
  EXPECT_EQ(issue_type_from_string("Story"), IssueType::feature);
  EXPECT_EQ(issue_status_from_string("In Progress"), IssueStatus::in_progress);
  EXPECT_EQ(issue_status_from_string("Closed"), IssueStatus::done);
  EXPECT_EQ(log_level_from_string("WARN"), LogLevel::warning);
  EXPECT_EQ(log_level_from_string("error"), LogLevel::error);
  EXPECT_FALSE(severity_from_string("meh"));
}
