#include "qgauge/ingestion.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <boost/regex.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <map>
#include <sstream>

namespace qgauge {

using nlohmann::json;
namespace pt = boost::property_tree;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '\n')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::optional<std::int64_t> to_count(std::string_view s) {
  s = trim(s);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || v < 0) return std::nullopt;
  return v;
}

std::optional<double> to_real(std::string_view s) {
  s = trim(s);
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && lower(s.substr(0, prefix.size())) == prefix;
}

void keep_if_valid(ParseResult& out, RawRecord r, const std::string& where) {
  auto problems = record_problems(r);
  if (!problems.empty()) {
    out.warnings.push_back(where + ": " + problems.front());
    ++out.skipped;
    return;
  }
  out.records.push_back(std::move(r));
}

// --- JUnit XML ---------------------------------------------------------------

void collect_suites(const pt::ptree& node, std::vector<const pt::ptree*>& out) {
  for (const auto& [name, child] : node) {
    if (name == "testsuite") {
      const auto before = out.size();
      collect_suites(child, out);
      if (out.size() == before) out.push_back(&child);
    } else if (name != "<xmlattr>") {
      collect_suites(child, out);
    }
  }
}

// --- CSV ---------------------------------------------------------------------

/// RFC 4180 rows: quoted fields may hold commas, quotes ("") and newlines.
std::vector<std::vector<std::string>> read_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(cell));
      cell.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !cell.empty()) {
        row.push_back(std::move(cell));
        rows.push_back(std::move(row));
      }
      row.clear();
      cell.clear();
      any = false;
    } else {
      cell.push_back(c);
      any = true;
    }
  }
  if (any || !cell.empty()) {
    row.push_back(std::move(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string canonical_column(std::string_view header) {
  static const std::map<std::string, std::string, std::less<>> aliases = {
      {"id", "issue_id"},          {"key", "issue_id"},         {"issue_key", "issue_id"},
      {"type", "issue_type"},      {"estimate", "estimate_hours"},
      {"estimated_hours", "estimate_hours"},                    {"due", "due_date"},
      {"sprint", "iteration"},     {"fix_version", "release"},
  };
  std::string key = lower(trim(header));
  std::replace(key.begin(), key.end(), ' ', '_');
  if (auto it = aliases.find(key); it != aliases.end()) return it->second;
  return key;
}

// --- log patterns ------------------------------------------------------------

bool has_capture(const std::string& pattern, std::string_view name) {
  for (const char* open : {"(?<", "(?P<", "(?'"}) {
    std::string needle = std::string(open) + std::string(name);
    needle.push_back(open[2] == '\'' ? '\'' : '>');
    if (pattern.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

// ---------------------------------------------------------------------------

LogPattern LogPattern::default_pattern() {
  return {R"(^(?<timestamp>\d{4}-\d{2}-\d{2}[T ]\d{2}:\d{2}(?::\d{2}(?:[.,]\d+)?)?(?:Z|[+-]\d{2}:?\d{2})?)\s+(?<level>[A-Za-z]+)\s+(?:(?<file>[^\s:]+):(?<line>\d+)\s+)?(?<message>.*)$)",
          "iso8601"};
}

void validate_log_pattern(const LogPattern& p) {
  try {
    boost::regex re(p.pattern);
  } catch (const boost::regex_error& e) {
    throw IngestError(std::string("log pattern does not compile: ") + e.what());
  }
  for (auto name : {"timestamp", "level", "message"}) {
    if (!has_capture(p.pattern, name)) {
      throw IngestError(std::string("log pattern lacks the named capture '") + name + "'");
    }
  }
  if (p.timestamp_format.empty()) throw IngestError("log timestamp format is empty");
}

std::optional<InputFormat> input_format_from_string(std::string_view name) {
  static constexpr std::array<std::pair<std::string_view, InputFormat>, 6> kNames{{
      {"testxml", InputFormat::testxml},
      {"commits", InputFormat::commits},
      {"static", InputFormat::static_analysis},
      {"issues", InputFormat::issues},
      {"logs", InputFormat::logs},
      {"records", InputFormat::records},
  }};
  for (const auto& [n, f] : kNames) {
    if (n == name) return f;
  }
  return std::nullopt;
}

std::string_view to_string(InputFormat f) {
  switch (f) {
    case InputFormat::testxml:
      return "testxml";
    case InputFormat::commits:
      return "commits";
    case InputFormat::static_analysis:
      return "static";
    case InputFormat::issues:
      return "issues";
    case InputFormat::logs:
      return "logs";
    case InputFormat::records:
      return "records";
  }
  return "?";
}

ParseResult parse_test_report_xml(std::string_view text, const IngestContext& ctx) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw IngestError(std::string("malformed test report XML: ") + e.what());
  }
  if (tree.empty()) throw IngestError("malformed test report XML: no root element");
  std::vector<const pt::ptree*> suites;
  collect_suites(tree, suites);

  std::string build = ctx.build_id;
  std::optional<std::string> root_timestamp;
  if (auto root = tree.get_child_optional("testsuites")) {
    if (build.empty()) {
      build = root->get("<xmlattr>.id", root->get("<xmlattr>.name", std::string{}));
    }
    if (auto ts = root->get_optional<std::string>("<xmlattr>.timestamp")) root_timestamp = *ts;
  }

  ParseResult out;
  std::size_t index = 0;
  for (const pt::ptree* suite : suites) {
    ++index;
    const std::string name = suite->get("<xmlattr>.name", std::string{});
    const std::string where = "testsuite #" + std::to_string(index) + " '" + name + "'";
    auto attr = [&](const char* key) -> std::optional<std::string> {
      if (auto v = suite->get_optional<std::string>(std::string("<xmlattr>.") + key)) return *v;
      return std::nullopt;
    };

    TestRun run;
    run.build_id = build;
    run.suite = name;
    bool ok = true;
    for (auto [key, target] : {std::pair{"tests", &run.total}, std::pair{"failures", &run.failures},
                               std::pair{"errors", &run.errors}}) {
      auto raw = attr(key);
      auto value = raw ? to_count(*raw) : std::nullopt;
      if (!value) {
        out.warnings.push_back(where + ": missing or invalid '" + key + "' attribute, skipped");
        ok = false;
        break;
      }
      *target = *value;
    }
    if (!ok) {
      ++out.skipped;
      continue;
    }
    if (auto raw = attr("skipped")) {
      auto value = to_count(*raw);
      if (!value) {
        out.warnings.push_back(where + ": invalid 'skipped' attribute, skipped");
        ++out.skipped;
        continue;
      }
      run.skipped = *value;
    }
    auto time = attr("time");
    auto duration = time ? to_real(*time) : std::nullopt;
    if (!duration) {
      out.warnings.push_back(where + ": missing or invalid 'time' attribute, skipped");
      ++out.skipped;
      continue;
    }
    run.duration_sec = *duration;

    Instant ts = ctx.default_timestamp;
    if (auto raw = attr("timestamp") ? attr("timestamp") : root_timestamp) {
      auto parsed = parse_instant(*raw);
      if (!parsed) {
        out.warnings.push_back(where + ": invalid timestamp '" + *raw + "', skipped");
        ++out.skipped;
        continue;
      }
      ts = *parsed;
    }
    RawRecord r;
    r.record_id = derive_record_id({build, name, format_instant(ts)});
    r.project = ctx.project;
    r.timestamp = ts;
    r.payload = std::move(run);
    keep_if_valid(out, std::move(r), where);
  }
  return out;
}

ParseResult parse_commit_log(std::string_view text, const IngestContext& ctx) {
  struct Block {
    std::size_t line = 0;
    CommitRecord commit;
    std::optional<Instant> date;
    std::string error;
  };
  std::vector<Block> blocks;
  static const boost::regex numstat(R"(^(\d+|-)\t(\d+|-)\t(.+)$)");

  std::size_t line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    if (starts_with_ci(line, "commit ")) {
      Block b;
      b.line = line_no;
      b.commit.revision = std::string(trim(line.substr(7)));
      blocks.push_back(std::move(b));
      continue;
    }
    if (blocks.empty() || trim(line).empty()) continue;
    Block& b = blocks.back();
    if (starts_with_ci(line, "author:") || starts_with_ci(line, "author ")) {
      b.commit.author = std::string(trim(line.substr(line[6] == ':' ? 7 : 6)));
    } else if (starts_with_ci(line, "date:") || starts_with_ci(line, "date ")) {
      const std::string_view raw = trim(line.substr(line[4] == ':' ? 5 : 4));
      b.date = parse_instant(raw);
      if (!b.date && b.error.empty()) b.error = "unparseable date '" + std::string(raw) + "'";
    } else if (line.find('\t') != std::string_view::npos && line.front() != ' ') {
      boost::cmatch m;
      if (!boost::regex_match(line.data(), line.data() + line.size(), m, numstat)) {
        if (b.error.empty()) b.error = "malformed numstat line " + std::to_string(line_no);
        continue;
      }
      FileChange change;
      change.path = m[3].str();
      change.lines_added = m[1].str() == "-" ? 0 : *to_count(m[1].str());
      change.lines_deleted = m[2].str() == "-" ? 0 : *to_count(m[2].str());
      b.commit.files.push_back(std::move(change));
    }
  }
  if (blocks.empty() && !trim(text).empty()) {
    throw IngestError("no 'commit <revision>' header found in commit log");
  }

  ParseResult out;
  for (auto& b : blocks) {
    const std::string where = "commit block at line " + std::to_string(b.line);
    if (b.error.empty() && b.commit.revision.empty()) b.error = "empty revision";
    if (b.error.empty() && !b.date) b.error = "missing date";
    if (!b.error.empty()) {
      out.warnings.push_back(where + ": " + b.error + ", skipped");
      ++out.skipped;
      continue;
    }
    RawRecord r;
    r.record_id = b.commit.revision;
    r.project = ctx.project;
    r.timestamp = *b.date;
    r.payload = std::move(b.commit);
    keep_if_valid(out, std::move(r), where);
  }
  return out;
}

ParseResult parse_static_analysis_export(std::string_view text, const IngestContext& ctx) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw IngestError("static-analysis export is not valid JSON");
  Instant analysed = ctx.default_timestamp;
  const json* files = nullptr;
  if (doc.is_array()) {
    files = &doc;
  } else if (doc.is_object() && doc.contains("files") && doc["files"].is_array()) {
    files = &doc["files"];
    if (auto it = doc.find("analysis_timestamp"); it != doc.end() && !it->is_null()) {
      auto t = it->is_string() ? parse_instant(it->get<std::string>()) : std::nullopt;
      if (!t) throw IngestError("static-analysis export has an invalid analysis_timestamp");
      analysed = *t;
    }
  } else {
    throw IngestError("static-analysis export must be an array or an object with 'files'");
  }

  ParseResult out;
  const std::string ts = format_instant(analysed);
  for (std::size_t i = 0; i < files->size(); ++i) {
    const json& entry = (*files)[i];
    const std::string where = "file entry #" + std::to_string(i + 1);
    try {
      if (!entry.is_object()) throw RecordError("expected an object");
      json payload = entry;
      if (auto m = entry.find("measures"); m != entry.end() && m->is_object()) {
        payload.erase("measures");
        payload.update(*m);
      }
      if (!payload.contains("violations") && payload.contains("issues")) {
        payload["violations"] = payload["issues"];
      }
      payload.erase("issues");
      const json record = {{"source_kind", "file_measure"},
                           {"timestamp", ts},
                           {"record_id", "pending"},
                           {"payload", payload}};
      RawRecord r = record_from_json(record);
      const auto& path = r.as<FileMeasure>().path;
      r.record_id = derive_record_id({ts, path});
      r.project = ctx.project;
      keep_if_valid(out, std::move(r), where);
    } catch (const std::exception& e) {
      out.warnings.push_back(where + ": " + e.what() + ", skipped");
      ++out.skipped;
    }
  }
  return out;
}

ParseResult parse_issue_csv(std::string_view text, const IngestContext& ctx) {
  auto rows = read_csv(text);
  if (rows.empty()) {
    if (trim(text).empty()) return {};
    throw IngestError("issue CSV has no header row");
  }
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < rows[0].size(); ++i) column.emplace(canonical_column(rows[0][i]), i);
  for (auto required : {"issue_id", "issue_type", "status", "created", "updated"}) {
    if (!column.count(required)) {
      throw IngestError(std::string("issue CSV header lacks the '") + required + "' column");
    }
  }

  ParseResult out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = "row " + std::to_string(r + 1);
    auto cell = [&](const char* name) -> std::optional<std::string> {
      auto it = column.find(name);
      if (it == column.end() || it->second >= row.size()) return std::nullopt;
      std::string v(trim(row[it->second]));
      if (v.empty()) return std::nullopt;
      return v;
    };
    std::string error;
    auto need = [&](const char* name) -> std::string {
      auto v = cell(name);
      if (!v && error.empty()) error = std::string("missing ") + name;
      return v.value_or("");
    };
    auto instant = [&](const char* name, const std::optional<std::string>& raw) -> std::optional<Instant> {
      if (!raw) return std::nullopt;
      auto t = parse_instant(*raw);
      if (!t && error.empty()) error = std::string("unparseable ") + name + " '" + *raw + "'";
      return t;
    };

    Issue issue;
    issue.issue_id = need("issue_id");
    const std::string type = need("issue_type");
    const std::string status = need("status");
    const auto created = instant("created", cell("created"));
    const auto updated = instant("updated", cell("updated"));
    if (error.empty() && (!created || !updated)) error = "missing created/updated";
    if (error.empty()) {
      auto t = issue_type_from_string(type);
      auto s = issue_status_from_string(status);
      // Tracker-specific vocabularies that map to nothing known land in 'other'.
      issue.issue_type = t.value_or(IssueType::other);
      issue.status = s.value_or(IssueStatus::other);
    }
    issue.resolved = instant("resolved", cell("resolved"));
    issue.iteration = cell("iteration");
    issue.release = cell("release");
    issue.due_date = instant("due_date", cell("due_date"));
    issue.assignee = cell("assignee");
    issue.description = cell("description");
    if (auto est = cell("estimate_hours")) {
      issue.estimate_hours = to_real(*est);
      if (!issue.estimate_hours && error.empty()) error = "unparseable estimate_hours '" + *est + "'";
    }
    if (!error.empty()) {
      out.warnings.push_back(where + ": " + error + ", skipped");
      ++out.skipped;
      continue;
    }
    issue.created = *created;
    issue.updated = *updated;

    RawRecord rec;
    rec.record_id = derive_record_id({issue.issue_id, format_instant(issue.updated)});
    rec.project = ctx.project;
    rec.timestamp = issue.updated;
    rec.payload = std::move(issue);
    keep_if_valid(out, std::move(rec), where);
  }
  return out;
}

ParseResult parse_log_lines(std::string_view text, const LogPattern& pattern,
                            const IngestContext& ctx) {
  validate_log_pattern(pattern);
  const boost::regex re(pattern.pattern);
  const bool has_file = has_capture(pattern.pattern, "file");
  const bool has_line = has_capture(pattern.pattern, "line");

  ParseResult out;
  std::size_t line_no = 0;
  std::size_t non_empty = 0;
  std::size_t unmatched = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++non_empty;
    boost::cmatch m;
    if (!boost::regex_match(line.data(), line.data() + line.size(), m, re)) {
      ++unmatched;
      continue;
    }
    const std::string ts_text = m["timestamp"].str();
    auto ts = pattern.timestamp_format == "iso8601" ? parse_instant(ts_text)
                                                    : parse_instant(ts_text, pattern.timestamp_format);
    auto level = log_level_from_string(m["level"].str());
    if (!ts || !level) {
      ++unmatched;
      continue;
    }
    LogEntry entry;
    entry.level = *level;
    entry.message = m["message"].str();
    if (has_file && m["file"].matched) entry.source_file = m["file"].str();
    if (has_line && m["line"].matched) entry.source_line = to_count(m["line"].str());

    RawRecord r;
    r.record_id = derive_record_id({format_instant(*ts), entry.message, std::to_string(line_no)});
    r.project = ctx.project;
    r.timestamp = *ts;
    r.payload = std::move(entry);
    out.records.push_back(std::move(r));
  }
  out.skipped = unmatched;
  if (non_empty > 0 && out.records.empty()) {
    out.warnings.push_back("pattern matched nothing");
  } else if (unmatched > 0) {
    out.warnings.push_back(std::to_string(unmatched) + " line(s) did not match the log pattern");
  }
  return out;
}

ParseResult ingest_generic_records(std::string_view text, const IngestContext& ctx) {
  ParseResult out;
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      out.warnings.push_back(where + ": not valid JSON");
      ++out.skipped;
      continue;
    }
    try {
      RawRecord r = record_from_json(j);
      if (!j.contains("project")) r.project = ctx.project;
      keep_if_valid(out, std::move(r), where);
    } catch (const RecordError& e) {
      out.warnings.push_back(where + ": " + e.what());
      ++out.skipped;
    }
  }
  return out;
}

ParseResult parse_input(InputFormat format, std::string_view text, const IngestContext& ctx,
                        const LogPattern& pattern) {
  switch (format) {
    case InputFormat::testxml:
      return parse_test_report_xml(text, ctx);
    case InputFormat::commits:
      return parse_commit_log(text, ctx);
    case InputFormat::static_analysis:
      return parse_static_analysis_export(text, ctx);
    case InputFormat::issues:
      return parse_issue_csv(text, ctx);
    case InputFormat::logs:
      return parse_log_lines(text, pattern, ctx);
    case InputFormat::records:
      return ingest_generic_records(text, ctx);
  }
  throw IngestError("unknown input format");
}

}  // namespace qgauge
