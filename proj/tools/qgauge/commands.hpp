#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "qgauge/alerts.hpp"
#include "qgauge/ingestion.hpp"
#include "qgauge/model.hpp"
#include "qgauge/service.hpp"
#include "qgauge/snapshot.hpp"

namespace qgauge::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kFailure = 1, kInvalid = 2 };

struct Output {
  std::ostream& out;
  std::ostream& err;
};

/// Explicit from/to, or a trailing window of `window_days` ending now.
struct WindowOptions {
  std::optional<int> window_days;
  std::optional<std::string> from;
  std::optional<std::string> to;
};

/// Throws std::invalid_argument with a readable message.
TimeWindow resolve_window(const WindowOptions& options, int default_days, Instant now);

struct IngestOptions {
  std::string project = "default";
  std::string build_id;
  LogPattern log_pattern = LogPattern::default_pattern();
  bool json = false;
};

struct ReportOptions {
  std::optional<std::string> element;
  /// Lists every element as no-data when the store holds no snapshot.
  std::optional<fs::path> model;
  WindowOptions window;
  bool json = false;
};

int cmd_validate(const fs::path& model_path, bool json, Output io);
int cmd_ingest(std::string_view format, const fs::path& input, const fs::path& store,
               const IngestOptions& options, Output io);
int cmd_assess(const fs::path& model_path, const fs::path& store, const WindowOptions& window, bool json,
               Output io, int default_window_days = 14);
int cmd_report(const fs::path& store, const ReportOptions& options, Output io);
int cmd_serve(const ServiceConfig& config, Output io);
int cmd_demo(const fs::path& target, Output io);

/// `0.6667`, or `-` for no-data.
std::string format_value(std::optional<double> v);
/// `ALERT maintainability green→orange value 0.6667 (warning)`
std::string format_alert(const Alert& a);
/// Strata sections (aspects, factors, metrics), one `  id value color` row per
/// element, in model order when a model is given. With `details`, metric rows
/// are followed by their raw summary.
void print_snapshot_table(std::ostream& out, const Snapshot& snapshot, const QualityModel* model, bool details);
void print_drilldown(std::ostream& out, const DrilldownNode& node, std::size_t max_offenders, int depth = 0);

}  // namespace qgauge::cli
