#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "qgauge/time.hpp"
#include "qgauge/types.hpp"

namespace qgauge {

enum class Severity { blocker, critical, major, minor, info };
enum class ViolationType { code_smell, bug, vulnerability };
enum class IssueType { bug, maintenance, feature, other };
enum class IssueStatus { open, in_progress, done, other };
enum class LogLevel { fatal, error, warning, info, debug, trace };

struct RuleViolation {
  std::string rule;
  Severity severity = Severity::info;
  std::optional<ViolationType> type;

  bool operator==(const RuleViolation&) const = default;
};

/// Static-analysis measures of one file.
struct FileMeasure {
  std::string path;
  std::int64_t loc = 0;
  std::int64_t comment_lines = 0;
  std::int64_t duplicated_lines = 0;
  std::vector<std::int64_t> function_complexities;
  std::vector<RuleViolation> violations;
  std::optional<double> line_coverage;
  std::optional<double> condition_coverage;

  bool operator==(const FileMeasure&) const = default;
};

struct FileChange {
  std::string path;
  std::int64_t lines_added = 0;
  std::int64_t lines_deleted = 0;

  bool operator==(const FileChange&) const = default;
};

struct CommitRecord {
  std::string revision;
  std::string author;
  std::vector<FileChange> files;

  bool operator==(const CommitRecord&) const = default;
};

struct TestRun {
  std::string build_id;
  std::string suite;
  std::int64_t total = 0;
  std::int64_t errors = 0;
  std::int64_t failures = 0;
  std::int64_t skipped = 0;
  double duration_sec = 0.0;

  bool operator==(const TestRun&) const = default;
};

struct Issue {
  std::string issue_id;
  IssueType issue_type = IssueType::other;
  IssueStatus status = IssueStatus::other;
  Instant created;
  Instant updated;
  std::optional<Instant> resolved;
  std::optional<std::string> iteration;
  std::optional<std::string> release;
  std::optional<Instant> due_date;
  std::optional<std::string> assignee;
  std::optional<double> estimate_hours;
  std::optional<std::string> description;

  bool operator==(const Issue&) const = default;
};

struct LogEntry {
  LogLevel level = LogLevel::info;
  std::optional<std::string> source_file;
  std::optional<std::int64_t> source_line;
  std::string message;

  bool operator==(const LogEntry&) const = default;
};

struct UsageEvent {
  std::string feature;
  std::optional<double> duration_sec;

  bool operator==(const UsageEvent&) const = default;
};

struct AvailabilitySample {
  bool up = true;

  bool operator==(const AvailabilitySample&) const = default;
};

/// Alternative order matches SourceKind.
using Payload = std::variant<FileMeasure, CommitRecord, TestRun, Issue, LogEntry, UsageEvent,
                             AvailabilitySample>;

struct RawRecord {
  std::string record_id;
  std::string project = "default";
  Instant timestamp;
  Payload payload;

  SourceKind kind() const { return static_cast<SourceKind>(payload.index()); }

  template <typename T>
  const T& as() const {
    return std::get<T>(payload);
  }

  bool operator==(const RawRecord&) const = default;
};

class RecordError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string_view to_string(Severity v);
std::string_view to_string(ViolationType v);
std::string_view to_string(IssueType v);
std::string_view to_string(IssueStatus v);
std::string_view to_string(LogLevel v);

/// Case-insensitive; accepts the spellings common trackers and analyzers use
/// (`CODE_SMELL`, `In Progress`, `WARN`, ...).
std::optional<Severity> severity_from_string(std::string_view s);
std::optional<ViolationType> violation_type_from_string(std::string_view s);
std::optional<IssueType> issue_type_from_string(std::string_view s);
std::optional<IssueStatus> issue_status_from_string(std::string_view s);
std::optional<LogLevel> log_level_from_string(std::string_view s);

/// Invariant violations of one record, empty when valid.
std::vector<std::string> record_problems(const RawRecord& r);

nlohmann::json record_to_json(const RawRecord& r);

/// Canonical record document. The payload may be nested under `payload` or
/// given inline; a missing `record_id` is derived from the content. Throws
/// RecordError.
RawRecord record_from_json(const nlohmann::json& j);

/// Stable content hash (SHA-256, hex prefix) over the parts.
std::string derive_record_id(std::initializer_list<std::string_view> parts);

}  // namespace qgauge
