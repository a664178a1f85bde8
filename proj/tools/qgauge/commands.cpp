#include "qgauge/commands.hpp"

#include <pthread.h>
#include <signal.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "qgauge/assessment.hpp"
#include "qgauge/store.hpp"

namespace qgauge::cli {

namespace {

std::optional<std::string> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

/// Reads and validates a model, reporting problems. Sets `exit_code` on
/// failure.
std::optional<QualityModel> load_model(const fs::path& path, Output io, int& exit_code) {
  auto text = read_file(path);
  if (!text) {
    io.err << "error: cannot read model " << path.string() << "\n";
    exit_code = kFailure;
    return std::nullopt;
  }
  try {
    QualityModel model = parse_model_unchecked(*text);
    if (auto violations = validate_model(model); !violations.empty()) {
      io.err << "invalid model " << path.string() << ":\n";
      for (const auto& v : violations) io.err << "  [" << v.rule << "] " << v.message << "\n";
      exit_code = kInvalid;
      return std::nullopt;
    }
    return model;
  } catch (const ModelError& e) {
    io.err << "invalid model " << path.string() << ": " << e.what() << "\n";
    exit_code = kInvalid;
    return std::nullopt;
  }
}

Instant file_time(const fs::path& path) {
  std::error_code ec;
  const auto t = fs::last_write_time(path, ec);
  if (ec) return now_utc();
  return std::chrono::floor<std::chrono::seconds>(std::chrono::file_clock::to_sys(t));
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

const char* stratum_heading(Stratum s) {
  switch (s) {
    case Stratum::aspect:
      return "aspects";
    case Stratum::factor:
      return "factors";
    case Stratum::metric:
      return "metrics";
  }
  return "";
}

void print_raw_summary(std::ostream& out, const RawSummary& summary, const char* indent) {
  if (summary.empty()) return;
  out << indent << "raw:";
  for (const auto& [key, value] : summary) out << " " << key << "=" << format_number(value);
  out << "\n";
}

}  // namespace

TimeWindow resolve_window(const WindowOptions& options, int default_days, Instant now) {
  if (options.from || options.to) {
    if (options.window_days) throw std::invalid_argument("--window-days cannot be combined with --from/--to");
    Instant to = now;
    if (options.to) {
      auto parsed = parse_instant(*options.to);
      if (!parsed) throw std::invalid_argument("--to is not an ISO-8601 instant: " + *options.to);
      to = *parsed;
    }
    Instant from = to - std::chrono::days(default_days);
    if (options.from) {
      auto parsed = parse_instant(*options.from);
      if (!parsed) throw std::invalid_argument("--from is not an ISO-8601 instant: " + *options.from);
      from = *parsed;
    }
    if (!(from < to)) throw std::invalid_argument("window start must be before its end");
    return {from, to};
  }
  const int days = options.window_days.value_or(default_days);
  if (days < 1) throw std::invalid_argument("--window-days must be at least 1");
  return TimeWindow::trailing_days(now, days);
}

std::string format_value(std::optional<double> v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

std::string format_alert(const Alert& a) {
  std::string line = "ALERT " + a.element_id + " ";
  if (a.previous_color) {
    line += std::string(to_string(*a.previous_color)) + "→" + std::string(to_string(a.new_color));
  } else {
    line += std::string(to_string(a.new_color)) + " (first assessment)";
  }
  line += " value " + format_value(a.value) + " (" + std::string(to_string(a.threshold_crossed)) + ")";
  return line;
}

void print_snapshot_table(std::ostream& out, const Snapshot& snapshot, const QualityModel* model, bool details) {
  for (Stratum s : {Stratum::aspect, Stratum::factor, Stratum::metric}) {
    std::vector<std::string> ids;
    if (model) {
      for (const auto& id : model->element_ids()) {
        if (model->stratum_of(id) == s) ids.push_back(id);
      }
    } else {
      for (const auto& [id, e] : snapshot.entries) {
        if (e.stratum == s) ids.push_back(id);
      }
    }
    if (ids.empty()) continue;
    out << stratum_heading(s) << "\n";
    for (const auto& id : ids) {
      const SnapshotEntry* e = snapshot.find(id);
      const auto value = e ? e->value : std::nullopt;
      const Color color = e ? e->color : Color::no_data;
      out << "  " << id << " " << format_value(value) << " " << to_string(color) << "\n";
      if (details && e && s == Stratum::metric) print_raw_summary(out, e->raw_summary, "      ");
    }
  }
}

void print_drilldown(std::ostream& out, const DrilldownNode& node, std::size_t max_offenders, int depth) {
  const std::string indent(static_cast<std::size_t>(depth) * 2 + 2, ' ');
  out << indent << node.element_id << " " << format_value(node.value) << " " << to_string(node.color);
  if (depth > 0) {
    char buf[48];
    std::snprintf(buf, sizeof buf, " (weight %.2f)", node.weight_from_parent);
    out << buf;
  }
  out << "\n";
  std::size_t shown = 0;
  for (const auto& o : node.offenders) {
    if (shown++ == max_offenders) {
      out << indent << "  ... " << node.offenders.size() - max_offenders << " more\n";
      break;
    }
    out << indent << "  - " << o.entity << ": " << format_number(o.base_value) << " (utility "
        << format_number(o.utility) << ")\n";
  }
  for (const auto& child : node.children) print_drilldown(out, child, max_offenders, depth + 1);
}

int cmd_validate(const fs::path& model_path, bool json, Output io) {
  auto text = read_file(model_path);
  if (!text) {
    io.err << "error: cannot read model " << model_path.string() << "\n";
    return kFailure;
  }
  std::vector<Violation> violations;
  try {
    violations = validate_model(parse_model_unchecked(*text));
  } catch (const ModelError& e) {
    violations.push_back({"", "syntax", e.what()});
  }
  if (json) {
    io.out << nlohmann::json{{"valid", violations.empty()}, {"violations", violations_to_json(violations)}}.dump(2)
           << "\n";
  } else if (violations.empty()) {
    io.out << "model valid\n";
  } else {
    io.out << "model invalid: " << violations.size() << " violation(s)\n";
    for (const auto& v : violations) io.out << "  [" << v.rule << "] " << v.message << "\n";
  }
  return violations.empty() ? kOk : kInvalid;
}

int cmd_ingest(std::string_view format_name, const fs::path& input, const fs::path& store_dir,
               const IngestOptions& options, Output io) {
  const auto format = input_format_from_string(format_name);
  if (!format) {
    io.err << "error: unknown format '" << format_name << "' (testxml, commits, static, issues, logs, records)\n";
    return kFailure;
  }
  auto text = read_file(input);
  if (!text) {
    io.err << "error: cannot read " << input.string() << "\n";
    return kFailure;
  }
  IngestContext ctx;
  ctx.project = options.project;
  ctx.build_id = options.build_id;
  ctx.default_timestamp = file_time(input);
  try {
    const ParseResult parsed = parse_input(*format, *text, ctx, options.log_pattern);
    Store store(store_dir, Store::Mode::read_write, options.project);
    const AppendResult r = store.append(parsed.records);
    if (options.json) {
      io.out << nlohmann::json{{"inserted", r.inserted},
                               {"duplicates", r.duplicates},
                               {"skipped", parsed.skipped},
                               {"warnings", parsed.warnings}}
                    .dump(2)
             << "\n";
    } else {
      io.out << "inserted " << r.inserted << ", duplicates " << r.duplicates << ", warnings "
             << parsed.warnings.size() << "\n";
      for (const auto& w : parsed.warnings) io.err << "warning: " << w << "\n";
    }
    return kOk;
  } catch (const IngestError& e) {
    io.err << "error: " << input.string() << ": " << e.what() << "\n";
    return kFailure;
  } catch (const StoreError& e) {
    io.err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

int cmd_assess(const fs::path& model_path, const fs::path& store_dir, const WindowOptions& window, bool json,
               Output io, int default_window_days) {
  int code = kOk;
  auto model = load_model(model_path, io, code);
  if (!model) return code;
  TimeWindow w;
  try {
    w = resolve_window(window, window.window_days ? *window.window_days : default_window_days, now_utc());
  } catch (const std::invalid_argument& e) {
    io.err << "error: " << e.what() << "\n";
    return kFailure;
  }
  try {
    Store store(store_dir);
    Engine engine(*model, store);
    const auto result = engine.run_assessment({w, Trigger::manual});
    if (json) {
      nlohmann::json alerts = nlohmann::json::array();
      for (const auto& a : result.alerts) alerts.push_back(alert_to_json(a));
      io.out << nlohmann::json{{"snapshot", snapshot_to_json(result.snapshot)}, {"alerts", alerts}}.dump(2) << "\n";
    } else {
      io.out << "assessment " << result.snapshot.snapshot_id << " over [" << format_instant(w.from) << ", "
             << format_instant(w.to) << ")\n";
      print_snapshot_table(io.out, result.snapshot, engine.model().get(), false);
      for (const auto& a : result.alerts) io.out << format_alert(a) << "\n";
    }
    return kOk;
  } catch (const StoreError& e) {
    io.err << "error: " << e.what() << "\n";
    return kFailure;
  } catch (const ModelError& e) {
    io.err << "error: " << e.what() << "\n";
    return kInvalid;
  }
}

int cmd_report(const fs::path& store_dir, const ReportOptions& options, Output io) {
  std::optional<QualityModel> model;
  if (options.model) {
    int code = kOk;
    model = load_model(*options.model, io, code);
    if (!model) return code;
  }
  std::unique_ptr<Store> store;
  try {
    if (fs::exists(store_dir)) store = std::make_unique<Store>(store_dir, Store::Mode::read_only);
  } catch (const StoreError& e) {
    io.err << "error: " << e.what() << "\n";
    return kFailure;
  }

  if (options.element) {
    TimeWindow w = TimeWindow::everything();
    if (options.window.from || options.window.to || options.window.window_days) {
      try {
        w = resolve_window(options.window, 14, now_utc());
      } catch (const std::invalid_argument& e) {
        io.err << "error: " << e.what() << "\n";
        return kFailure;
      }
    }
    const auto points = store ? store->element_series(*options.element, w) : std::vector<SeriesPoint>{};
    if (options.json) {
      io.out << series_to_json(*options.element, points).dump(2) << "\n";
    } else {
      io.out << *options.element << " history (" << points.size() << " points)\n";
      for (const auto& p : points) {
        io.out << "  " << format_instant(p.evaluated_at) << " " << format_value(p.value) << " "
               << to_string(p.color) << " " << p.snapshot_id << "\n";
      }
    }
    return kOk;
  }

  std::optional<Snapshot> latest = store ? store->latest_snapshot() : std::nullopt;
  if (!latest) {
    if (!model) {
      io.out << (options.json ? "null" : "no assessments yet") << "\n";
      return kOk;
    }
    latest.emplace();
    for (const auto& id : model->element_ids()) latest->entries[id].stratum = *model->stratum_of(id);
  }
  if (options.json) {
    io.out << snapshot_to_json(*latest).dump(2) << "\n";
    return kOk;
  }
  if (!latest->snapshot_id.empty()) {
    io.out << "snapshot " << latest->snapshot_id << " evaluated " << format_instant(latest->evaluated_at)
           << " over [" << format_instant(latest->window.from) << ", " << format_instant(latest->window.to)
           << ")\n";
  } else {
    io.out << "no assessments yet\n";
  }
  print_snapshot_table(io.out, *latest, model ? &*model : nullptr, true);
  return kOk;
}

int cmd_serve(const ServiceConfig& config, Output io) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  std::unique_ptr<Service> service;
  try {
    service = std::make_unique<Service>(config);
  } catch (const ValidationError& e) {
    io.err << "invalid model " << config.model.string() << ":\n";
    for (const auto& v : e.violations()) io.err << "  [" << v.rule << "] " << v.message << "\n";
    return kInvalid;
  } catch (const ModelError& e) {
    io.err << "invalid model " << config.model.string() << ": " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << "\n";
    return kFailure;
  }
  io.out << "listening on http://" << config.host << ":" << service->port() << std::endl;

  std::thread waiter([&] {
    int received = 0;
    sigwait(&signals, &received);
    service->stop();
  });
  service->run();
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  io.out << "stopped\n";
  return kOk;
}

}  // namespace qgauge::cli
