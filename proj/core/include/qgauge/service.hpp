#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "qgauge/assessment.hpp"
#include "qgauge/ingestion.hpp"
#include "qgauge/store.hpp"

namespace qgauge {

/// Engine configuration (`config.json`). Relative paths resolve against the
/// directory of the config file.
struct ServiceConfig {
  std::filesystem::path store = "store";
  std::filesystem::path model = "model.json";
  int period_minutes = 60;
  int window_days = 14;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string cors_origin = "*";
  std::string project = "default";
  LogPattern log_pattern = LogPattern::default_pattern();

  /// Throws std::runtime_error for unreadable or malformed files.
  static ServiceConfig load(const std::filesystem::path& file);
  static ServiceConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
};

/// Path named by QGAUGE_CONFIG, if set.
std::optional<std::filesystem::path> config_path_from_env();

std::string violations_text(const std::vector<Violation>& violations);
nlohmann::json violations_to_json(const std::vector<Violation>& violations);

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

using QueryParams = std::map<std::string, std::string, std::less<>>;

/// Transport-independent request handling for every endpoint. Errors come
/// back as {status, code, detail} bodies; nothing throws.
class ApiHandler {
 public:
  struct Options {
    int window_days = 14;
    std::string project = "default";
    LogPattern log_pattern = LogPattern::default_pattern();
    std::function<Instant()> clock = now_utc;
  };

  ApiHandler(Engine& engine, Options options);

  ApiResponse handle(std::string_view method, std::string_view path, const QueryParams& query,
                     std::string_view body);

 private:
  ApiResponse health();
  ApiResponse current_assessment();
  ApiResponse history(const QueryParams& query);
  ApiResponse drilldown_of(std::string_view element, const QueryParams& query);
  ApiResponse alerts(const QueryParams& query);
  ApiResponse model();
  ApiResponse ingest(std::string_view format, const QueryParams& query, std::string_view body);
  ApiResponse assess(std::string_view body);
  ApiResponse put_model(std::string_view body);
  ApiResponse what_if(std::string_view body);
  ApiResponse acknowledge(std::string_view alert_id);

  AssessmentRequest request_from(const nlohmann::json& body, Trigger trigger) const;

  Engine& engine_;
  Options options_;
};

ApiResponse api_error(int status, std::string code, std::string detail);

/// HTTP transport over an ApiHandler.
class ApiServer {
 public:
  ApiServer(ApiHandler& handler, std::string cors_origin = "*");
  ~ApiServer();

  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Port 0 picks a free port. Returns the bound port; throws
  /// std::runtime_error when the address is unavailable.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Requires bind().
  void run();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Model, store, engine, scheduler and HTTP server wired from a config.
class Service {
 public:
  /// Throws ValidationError for an invalid model, ModelError, StoreError or
  /// std::runtime_error for unusable files and ports.
  explicit Service(const ServiceConfig& config);
  ~Service();

  int port() const { return port_; }
  /// Blocks until stop(); the scheduler runs meanwhile.
  void run();
  /// Safe from any thread. In-flight requests finish first.
  void stop();

 private:
  ServiceConfig config_;
  std::unique_ptr<Store> store_;
  std::unique_ptr<Engine> engine_;
  std::unique_ptr<ApiHandler> handler_;
  std::unique_ptr<ApiServer> server_;
  int port_ = 0;
  std::atomic<bool> stop_requested_{false};
};

}  // namespace qgauge
