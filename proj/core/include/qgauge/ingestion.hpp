#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qgauge/records.hpp"
#include "qgauge/time.hpp"

namespace qgauge {

/// Settings shared by all parsers. Parsers are pure: the same text and
/// context always produce the same records, record ids included.
struct IngestContext {
  std::string project = "default";
  /// Build identifier for test reports that do not carry one.
  std::string build_id;
  /// Used when the input has no timestamp of its own (the CLI passes the
  /// input file's modification time).
  Instant default_timestamp{};
};

struct ParseResult {
  std::vector<RawRecord> records;
  std::vector<std::string> warnings;
  /// Lines or entries that did not produce a record.
  std::size_t skipped = 0;
};

/// The input as a whole cannot be read (malformed XML/JSON, missing CSV
/// header, ...). Per-entry problems are warnings instead.
class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Plain-text log line layout. `pattern` uses named captures `timestamp`,
/// `level`, `message` and optionally `file` and `line`. `timestamp_format` is
/// either "iso8601" or a strftime-style format.
struct LogPattern {
  std::string pattern;
  std::string timestamp_format = "iso8601";

  static LogPattern default_pattern();
};

/// Throws IngestError when the pattern does not compile or lacks a required
/// capture.
void validate_log_pattern(const LogPattern& p);

enum class InputFormat { testxml, commits, static_analysis, issues, logs, records };

std::optional<InputFormat> input_format_from_string(std::string_view name);
std::string_view to_string(InputFormat f);

/// JUnit-style XML: one TestRun per innermost `testsuite` element.
ParseResult parse_test_report_xml(std::string_view text, const IngestContext& ctx = {});

/// Blocks of `commit <rev>`, `author <name>`, `date <iso>` followed by
/// `added<TAB>deleted<TAB>path` numstat lines. Binary markers (`-`) count as 0.
ParseResult parse_commit_log(std::string_view text, const IngestContext& ctx = {});

/// Static-analysis export: an object with `analysis_timestamp` and `files`, or
/// a bare array of file entries.
ParseResult parse_static_analysis_export(std::string_view text, const IngestContext& ctx = {});

/// Issue CSV with a header row; unknown columns are ignored.
ParseResult parse_issue_csv(std::string_view text, const IngestContext& ctx = {});

ParseResult parse_log_lines(std::string_view text, const LogPattern& pattern,
                            const IngestContext& ctx = {});

/// One canonical RawRecord JSON document per line.
ParseResult ingest_generic_records(std::string_view text, const IngestContext& ctx = {});

ParseResult parse_input(InputFormat format, std::string_view text, const IngestContext& ctx = {},
                        const LogPattern& pattern = LogPattern::default_pattern());

}  // namespace qgauge
