#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qgauge/commands.hpp"
#include "qgauge/logging.hpp"

using namespace qgauge;
using namespace qgauge::cli;

namespace {

struct Settings {
  std::optional<ServiceConfig> config;

  std::optional<fs::path> model(const std::string& flag) const {
    if (!flag.empty()) return fs::path(flag);
    if (config) return config->model;
    return std::nullopt;
  }
  std::optional<fs::path> store(const std::string& flag) const {
    if (!flag.empty()) return fs::path(flag);
    if (config) return config->store;
    return std::nullopt;
  }
};

void add_window_flags(CLI::App* cmd, std::optional<int>& days, std::optional<std::string>& from,
                      std::optional<std::string>& to) {
  cmd->add_option("--window-days", days, "Trailing window length in days, ending now");
  cmd->add_option("--from", from, "Window start (ISO-8601)");
  cmd->add_option("--to", to, "Window end, exclusive (ISO-8601)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qgauge: quality model assessment engine"};
  app.require_subcommand(1);
  std::string config_path;
  std::string log_level = "warn";
  app.add_option("--config", config_path, "Engine config file (default: $QGAUGE_CONFIG)");
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

  std::string model_flag;
  std::string store_flag;
  bool json = false;

  auto* validate = app.add_subcommand("validate", "Check a quality model document");
  validate->add_option("--model,model", model_flag, "Model file");
  validate->add_flag("--json", json, "Machine-readable output");

  std::string format;
  std::string input;
  std::string build_id;
  std::string project = "default";
  auto* ingest = app.add_subcommand("ingest", "Parse a data source export into the store");
  ingest->add_option("format", format, "testxml, commits, static, issues, logs or records")->required();
  ingest->add_option("input", input, "Input file")->required();
  ingest->add_option("--store", store_flag, "Store directory");
  ingest->add_option("--build-id", build_id, "Build id for test reports without one");
  ingest->add_option("--project", project, "Project name recorded with each record");
  ingest->add_flag("--json", json, "Machine-readable output");

  std::optional<int> window_days;
  std::optional<std::string> from;
  std::optional<std::string> to;
  auto* assess = app.add_subcommand("assess", "Run one assessment and print the result");
  assess->add_option("--model", model_flag, "Model file");
  assess->add_option("--store", store_flag, "Store directory");
  add_window_flags(assess, window_days, from, to);
  assess->add_flag("--json", json, "Machine-readable output");

  std::optional<std::string> element;
  auto* report = app.add_subcommand("report", "Print the latest snapshot or an element history");
  report->add_option("--store", store_flag, "Store directory");
  report->add_option("--model", model_flag, "Model file, used to list elements of an empty store");
  report->add_option("--element", element, "Print this element's history instead");
  add_window_flags(report, window_days, from, to);
  report->add_flag("--json", json, "Machine-readable output");

  std::optional<int> port;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service and the assessment schedule");
  serve->add_option("--model", model_flag, "Model file");
  serve->add_option("--store", store_flag, "Store directory");
  serve->add_option("--port", port, "Listening port (0 picks a free one)");

  std::string demo_dir = "qgauge-demo";
  auto* demo = app.add_subcommand("demo", "Replay the two-window demo scenario");
  demo->add_option("dir", demo_dir, "Target directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kFailure;
  }
  configure_logging(log_level);

  Settings settings;
  try {
    if (config_path.empty()) {
      if (auto env = config_path_from_env()) config_path = env->string();
    }
    if (!config_path.empty()) settings.config = ServiceConfig::load(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }

  Output io{std::cout, std::cerr};
  auto need = [&](const std::optional<fs::path>& value, const char* flag) {
    if (!value) std::cerr << "error: " << flag << " is required (or set it in the config file)\n";
    return value.has_value();
  };
  const int default_days = settings.config ? settings.config->window_days : 14;
  const WindowOptions window{window_days, from, to};

  if (*validate) {
    auto model = settings.model(model_flag);
    if (!need(model, "--model")) return kFailure;
    return cmd_validate(*model, json, io);
  }
  if (*ingest) {
    auto store = settings.store(store_flag);
    if (!need(store, "--store")) return kFailure;
    IngestOptions options;
    options.project = project;
    options.build_id = build_id;
    options.json = json;
    if (settings.config) options.log_pattern = settings.config->log_pattern;
    return cmd_ingest(format, input, *store, options, io);
  }
  if (*assess) {
    auto model = settings.model(model_flag);
    auto store = settings.store(store_flag);
    if (!need(model, "--model") || !need(store, "--store")) return kFailure;
    return cmd_assess(*model, *store, window, json, io, default_days);
  }
  if (*report) {
    auto store = settings.store(store_flag);
    if (!need(store, "--store")) return kFailure;
    ReportOptions options;
    options.element = element;
    options.model = settings.model(model_flag);
    options.window = window;
    options.json = json;
    return cmd_report(*store, options, io);
  }
  if (*serve) {
    ServiceConfig config = settings.config.value_or(ServiceConfig{});
    if (!model_flag.empty()) config.model = model_flag;
    if (!store_flag.empty()) config.store = store_flag;
    if (port) config.port = *port;
    if (log_level == "warn") configure_logging("info");
    return cmd_serve(config, io);
  }
  if (*demo) return cmd_demo(demo_dir, io);
  return kFailure;
}
