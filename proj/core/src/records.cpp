#include "qgauge/records.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <utility>

namespace qgauge {

using nlohmann::json;

namespace {

std::string normalize(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == ' ' || c == '-') {
      out.push_back('_');
    } else {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  while (!out.empty() && out.front() == '_') out.erase(out.begin());
  return out;
}

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::pair<std::string_view, E>, N>& table,
                        std::string_view s) {
  const std::string key = normalize(s);
  for (const auto& [name, value] : table) {
    if (name == key) return value;
  }
  return std::nullopt;
}

constexpr std::array<std::pair<std::string_view, Severity>, 5> kSeverities{{
    {"blocker", Severity::blocker},
    {"critical", Severity::critical},
    {"major", Severity::major},
    {"minor", Severity::minor},
    {"info", Severity::info},
}};

constexpr std::array<std::pair<std::string_view, ViolationType>, 4> kViolationTypes{{
    {"code_smell", ViolationType::code_smell},
    {"codesmell", ViolationType::code_smell},
    {"bug", ViolationType::bug},
    {"vulnerability", ViolationType::vulnerability},
}};

constexpr std::array<std::pair<std::string_view, IssueType>, 8> kIssueTypes{{
    {"bug", IssueType::bug},
    {"defect", IssueType::bug},
    {"maintenance", IssueType::maintenance},
    {"feature", IssueType::feature},
    {"new_feature", IssueType::feature},
    {"story", IssueType::feature},
    {"user_story", IssueType::feature},
    {"other", IssueType::other},
}};

constexpr std::array<std::pair<std::string_view, IssueStatus>, 14> kIssueStatuses{{
    {"open", IssueStatus::open},
    {"new", IssueStatus::open},
    {"todo", IssueStatus::open},
    {"to_do", IssueStatus::open},
    {"reopened", IssueStatus::open},
    {"in_progress", IssueStatus::in_progress},
    {"inprogress", IssueStatus::in_progress},
    {"in_review", IssueStatus::in_progress},
    {"done", IssueStatus::done},
    {"closed", IssueStatus::done},
    {"resolved", IssueStatus::done},
    {"fixed", IssueStatus::done},
    {"other", IssueStatus::other},
    {"blocked", IssueStatus::other},
}};

constexpr std::array<std::pair<std::string_view, LogLevel>, 9> kLogLevels{{
    {"fatal", LogLevel::fatal},
    {"critical", LogLevel::fatal},
    {"error", LogLevel::error},
    {"err", LogLevel::error},
    {"warning", LogLevel::warning},
    {"warn", LogLevel::warning},
    {"info", LogLevel::info},
    {"debug", LogLevel::debug},
    {"trace", LogLevel::trace},
}};

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<std::string_view, E>, N>& table, E value) {
  for (const auto& [name, v] : table) {
    if (v == value) return name;
  }
  return "?";
}

// --- JSON field helpers ----------------------------------------------------

[[noreturn]] void bad(const std::string& what) { throw RecordError(what); }

const json* field(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

std::string req_string(const json& obj, const char* key) {
  const json* v = field(obj, key);
  if (!v || !v->is_string()) bad(std::string("field '") + key + "' must be a string");
  return v->get<std::string>();
}

std::optional<std::string> opt_string(const json& obj, const char* key) {
  const json* v = field(obj, key);
  if (!v) return std::nullopt;
  if (!v->is_string()) bad(std::string("field '") + key + "' must be a string");
  return v->get<std::string>();
}

std::int64_t req_count(const json& obj, const char* key) {
  const json* v = field(obj, key);
  if (!v || !v->is_number_integer()) bad(std::string("field '") + key + "' must be an integer");
  return v->get<std::int64_t>();
}

std::int64_t count_or(const json& obj, const char* key, std::int64_t fallback) {
  return field(obj, key) ? req_count(obj, key) : fallback;
}

std::optional<double> opt_number(const json& obj, const char* key) {
  const json* v = field(obj, key);
  if (!v) return std::nullopt;
  if (!v->is_number()) bad(std::string("field '") + key + "' must be a number");
  return v->get<double>();
}

Instant req_instant(const json& obj, const char* key) {
  auto t = parse_instant(req_string(obj, key));
  if (!t) bad(std::string("field '") + key + "' is not an ISO-8601 instant");
  return *t;
}

std::optional<Instant> opt_instant(const json& obj, const char* key) {
  auto s = opt_string(obj, key);
  if (!s) return std::nullopt;
  auto t = parse_instant(*s);
  if (!t) bad(std::string("field '") + key + "' is not an ISO-8601 instant");
  return t;
}

template <typename E, typename Fn>
E req_enum(const json& obj, const char* key, Fn parse) {
  auto v = parse(req_string(obj, key));
  if (!v) bad(std::string("field '") + key + "' has an unknown value");
  return *v;
}

template <typename T>
void put_opt(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

void put_opt_instant(json& j, const char* key, const std::optional<Instant>& v) {
  if (v) j[key] = format_instant(*v);
}

// --- payload encoders --------------------------------------------------------

json payload_to_json(const FileMeasure& f) {
  json violations = json::array();
  for (const auto& v : f.violations) {
    json jv = {{"rule", v.rule}, {"severity", to_string(v.severity)}};
    if (v.type) jv["type"] = to_string(*v.type);
    violations.push_back(std::move(jv));
  }
  json j = {{"path", f.path},
            {"loc", f.loc},
            {"comment_lines", f.comment_lines},
            {"duplicated_lines", f.duplicated_lines},
            {"function_complexities", f.function_complexities},
            {"violations", violations}};
  put_opt(j, "line_coverage", f.line_coverage);
  put_opt(j, "condition_coverage", f.condition_coverage);
  return j;
}

json payload_to_json(const CommitRecord& c) {
  json files = json::array();
  for (const auto& f : c.files) {
    files.push_back(
        {{"path", f.path}, {"lines_added", f.lines_added}, {"lines_deleted", f.lines_deleted}});
  }
  return {{"revision", c.revision}, {"author", c.author}, {"files", files}};
}

json payload_to_json(const TestRun& t) {
  return {{"build_id", t.build_id}, {"suite", t.suite},       {"total", t.total},
          {"errors", t.errors},     {"failures", t.failures}, {"skipped", t.skipped},
          {"duration_sec", t.duration_sec}};
}

json payload_to_json(const Issue& i) {
  json j = {{"issue_id", i.issue_id},
            {"issue_type", to_string(i.issue_type)},
            {"status", to_string(i.status)},
            {"created", format_instant(i.created)},
            {"updated", format_instant(i.updated)}};
  put_opt_instant(j, "resolved", i.resolved);
  put_opt(j, "iteration", i.iteration);
  put_opt(j, "release", i.release);
  put_opt_instant(j, "due_date", i.due_date);
  put_opt(j, "assignee", i.assignee);
  put_opt(j, "estimate_hours", i.estimate_hours);
  put_opt(j, "description", i.description);
  return j;
}

json payload_to_json(const LogEntry& l) {
  json j = {{"level", to_string(l.level)}, {"message", l.message}};
  put_opt(j, "source_file", l.source_file);
  put_opt(j, "source_line", l.source_line);
  return j;
}

json payload_to_json(const UsageEvent& u) {
  json j = {{"feature", u.feature}};
  put_opt(j, "duration_sec", u.duration_sec);
  return j;
}

json payload_to_json(const AvailabilitySample& a) { return {{"up", a.up}}; }

// --- payload decoders --------------------------------------------------------

Payload payload_from_json(SourceKind kind, const json& p) {
  switch (kind) {
    case SourceKind::file_measure: {
      FileMeasure f;
      f.path = req_string(p, "path");
      f.loc = req_count(p, "loc");
      f.comment_lines = count_or(p, "comment_lines", 0);
      f.duplicated_lines = count_or(p, "duplicated_lines", 0);
      if (const json* fc = field(p, "function_complexities")) {
        if (!fc->is_array()) bad("field 'function_complexities' must be an array");
        for (const auto& c : *fc) {
          if (!c.is_number_integer()) bad("function complexities must be integers");
          f.function_complexities.push_back(c.get<std::int64_t>());
        }
      }
      if (const json* vs = field(p, "violations")) {
        if (!vs->is_array()) bad("field 'violations' must be an array");
        for (const auto& v : *vs) {
          RuleViolation rv;
          rv.rule = opt_string(v, "rule").value_or("");
          rv.severity = req_enum<Severity>(v, "severity", severity_from_string);
          if (auto t = opt_string(v, "type")) {
            rv.type = violation_type_from_string(*t);
            if (!rv.type) bad("violation type '" + *t + "' is unknown");
          }
          f.violations.push_back(std::move(rv));
        }
      }
      f.line_coverage = opt_number(p, "line_coverage");
      f.condition_coverage = opt_number(p, "condition_coverage");
      return f;
    }
    case SourceKind::commit: {
      CommitRecord c;
      c.revision = req_string(p, "revision");
      c.author = opt_string(p, "author").value_or("");
      if (const json* fs = field(p, "files")) {
        if (!fs->is_array()) bad("field 'files' must be an array");
        for (const auto& f : *fs) {
          c.files.push_back({req_string(f, "path"), count_or(f, "lines_added", 0),
                             count_or(f, "lines_deleted", 0)});
        }
      }
      return c;
    }
    case SourceKind::test_run: {
      TestRun t;
      t.build_id = opt_string(p, "build_id").value_or("");
      t.suite = opt_string(p, "suite").value_or("");
      t.total = req_count(p, "total");
      t.errors = count_or(p, "errors", 0);
      t.failures = count_or(p, "failures", 0);
      t.skipped = count_or(p, "skipped", 0);
      t.duration_sec = opt_number(p, "duration_sec").value_or(0.0);
      return t;
    }
    case SourceKind::issue: {
      Issue i;
      i.issue_id = req_string(p, "issue_id");
      i.issue_type = req_enum<IssueType>(p, "issue_type", issue_type_from_string);
      i.status = req_enum<IssueStatus>(p, "status", issue_status_from_string);
      i.created = req_instant(p, "created");
      i.updated = req_instant(p, "updated");
      i.resolved = opt_instant(p, "resolved");
      i.iteration = opt_string(p, "iteration");
      i.release = opt_string(p, "release");
      i.due_date = opt_instant(p, "due_date");
      i.assignee = opt_string(p, "assignee");
      i.estimate_hours = opt_number(p, "estimate_hours");
      i.description = opt_string(p, "description");
      return i;
    }
    case SourceKind::log_entry: {
      LogEntry l;
      l.level = req_enum<LogLevel>(p, "level", log_level_from_string);
      l.source_file = opt_string(p, "source_file");
      if (field(p, "source_line")) l.source_line = req_count(p, "source_line");
      l.message = opt_string(p, "message").value_or("");
      return l;
    }
    case SourceKind::usage_event: {
      UsageEvent u;
      u.feature = req_string(p, "feature");
      u.duration_sec = opt_number(p, "duration_sec");
      return u;
    }
    case SourceKind::availability_sample: {
      const json* up = field(p, "up");
      if (!up || !up->is_boolean()) bad("field 'up' must be a boolean");
      return AvailabilitySample{up->get<bool>()};
    }
  }
  bad("unknown kind");
}

}  // namespace

std::string_view to_string(Severity v) { return name_of(kSeverities, v); }
std::string_view to_string(ViolationType v) { return name_of(kViolationTypes, v); }
std::string_view to_string(IssueType v) { return name_of(kIssueTypes, v); }
std::string_view to_string(IssueStatus v) { return name_of(kIssueStatuses, v); }
std::string_view to_string(LogLevel v) { return name_of(kLogLevels, v); }

std::optional<Severity> severity_from_string(std::string_view s) { return lookup(kSeverities, s); }
std::optional<ViolationType> violation_type_from_string(std::string_view s) {
  return lookup(kViolationTypes, s);
}
std::optional<IssueType> issue_type_from_string(std::string_view s) {
  return lookup(kIssueTypes, s);
}
std::optional<IssueStatus> issue_status_from_string(std::string_view s) {
  return lookup(kIssueStatuses, s);
}
std::optional<LogLevel> log_level_from_string(std::string_view s) { return lookup(kLogLevels, s); }

std::vector<std::string> record_problems(const RawRecord& r) {
  std::vector<std::string> out;
  if (r.record_id.empty()) out.push_back("record_id is empty");
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, FileMeasure>) {
          if (p.path.empty()) out.push_back("file path is empty");
          if (!(p.loc >= p.comment_lines && p.comment_lines >= 0)) {
            out.push_back("expected loc >= comment_lines >= 0");
          }
          if (p.duplicated_lines < 0 || p.duplicated_lines > p.loc) {
            out.push_back("expected 0 <= duplicated_lines <= loc");
          }
          for (auto c : p.function_complexities) {
            if (c < 0) out.push_back("negative function complexity");
          }
          auto pct_ok = [](const std::optional<double>& v) { return !v || (*v >= 0 && *v <= 100); };
          if (!pct_ok(p.line_coverage) || !pct_ok(p.condition_coverage)) {
            out.push_back("coverage percentages must lie in [0,100]");
          }
        } else if constexpr (std::is_same_v<T, CommitRecord>) {
          if (p.revision.empty()) out.push_back("revision is empty");
          for (const auto& f : p.files) {
            if (f.lines_added < 0 || f.lines_deleted < 0) out.push_back("negative line counts");
          }
        } else if constexpr (std::is_same_v<T, TestRun>) {
          if (p.total < 0 || p.errors < 0 || p.failures < 0 || p.skipped < 0) {
            out.push_back("negative test counts");
          }
          if (p.errors + p.failures + p.skipped > p.total) {
            out.push_back("errors + failures + skipped exceeds total");
          }
          if (!(p.duration_sec >= 0)) out.push_back("negative duration");
        } else if constexpr (std::is_same_v<T, Issue>) {
          if (p.issue_id.empty()) out.push_back("issue_id is empty");
          if (p.updated < p.created) out.push_back("updated precedes created");
          if (p.resolved && *p.resolved < p.created) out.push_back("resolved precedes created");
        } else if constexpr (std::is_same_v<T, UsageEvent>) {
          if (p.feature.empty()) out.push_back("feature is empty");
          if (p.duration_sec && *p.duration_sec < 0) out.push_back("negative duration");
        }
      },
      r.payload);
  return out;
}

json record_to_json(const RawRecord& r) {
  return {{"record_id", r.record_id},
          {"source_kind", to_string(r.kind())},
          {"project", r.project},
          {"timestamp", format_instant(r.timestamp)},
          {"payload", std::visit([](const auto& p) { return payload_to_json(p); }, r.payload)}};
}

RawRecord record_from_json(const json& j) {
  if (!j.is_object()) bad("record must be a JSON object");
  const std::string kind_name = req_string(j, "source_kind");
  auto kind = source_kind_from_string(kind_name);
  if (!kind) bad("unknown kind '" + kind_name + "'");
  RawRecord r;
  r.timestamp = req_instant(j, "timestamp");
  r.project = opt_string(j, "project").value_or("default");
  const json* payload = field(j, "payload");
  if (payload && !payload->is_object()) bad("field 'payload' must be an object");
  r.payload = payload_from_json(*kind, payload ? *payload : j);
  if (auto id = opt_string(j, "record_id")) {
    r.record_id = *id;
  } else {
    const std::string body =
        std::visit([](const auto& p) { return payload_to_json(p).dump(); }, r.payload);
    const std::string ts = format_instant(r.timestamp);
    r.record_id = derive_record_id({kind_name, ts, body});
  }
  return r;
}

std::string derive_record_id(std::initializer_list<std::string_view> parts) {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  bool first = true;
  for (auto part : parts) {
    if (!first) EVP_DigestUpdate(ctx, "\x1f", 1);
    EVP_DigestUpdate(ctx, part.data(), part.size());
    first = false;
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < 12 && i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

}  // namespace qgauge
