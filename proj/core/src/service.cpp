#include "qgauge/service.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "qgauge/alerts.hpp"
#include "qgauge/scheduler.hpp"

namespace qgauge {

namespace fs = std::filesystem;
using nlohmann::json;

// --- config ------------------------------------------------------------------

ServiceConfig ServiceConfig::from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw std::runtime_error("config must be a JSON object");
  ServiceConfig c;
  auto path = [&](const char* key, fs::path& target) {
    if (auto it = j.find(key); it != j.end()) {
      fs::path p = it->get<std::string>();
      target = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    } else if (!base_dir.empty()) {
      target = base_dir / target;
    }
  };
  try {
    path("store", c.store);
    path("model", c.model);
    c.period_minutes = j.value("period_minutes", c.period_minutes);
    c.window_days = j.value("window_days", c.window_days);
    c.host = j.value("host", c.host);
    c.port = j.value("port", c.port);
    c.cors_origin = j.value("cors_origin", c.cors_origin);
    c.project = j.value("project", c.project);
    if (auto it = j.find("log_pattern"); it != j.end()) {
      c.log_pattern.pattern = it->at("pattern").get<std::string>();
      c.log_pattern.timestamp_format = it->value("timestamp_format", std::string("iso8601"));
    }
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed config: ") + e.what());
  }
  if (c.period_minutes < 1) throw std::runtime_error("config: period_minutes must be at least 1");
  if (c.window_days < 1) throw std::runtime_error("config: window_days must be at least 1");
  if (c.port < 0 || c.port > 65535) throw std::runtime_error("config: port out of range");
  return c;
}

ServiceConfig ServiceConfig::load(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read config " + file.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw std::runtime_error("config " + file.string() + " is not valid JSON");
  return from_json(j, file.parent_path());
}

std::optional<fs::path> config_path_from_env() {
  const char* value = std::getenv("QGAUGE_CONFIG");
  if (!value || !*value) return std::nullopt;
  return fs::path(value);
}

std::string violations_text(const std::vector<Violation>& violations) {
  std::string out;
  for (const auto& v : violations) out += v.rule + ": " + v.message + "\n";
  return out;
}

json violations_to_json(const std::vector<Violation>& violations) {
  json out = json::array();
  for (const auto& v : violations) out.push_back({{"element", v.element}, {"rule", v.rule}, {"message", v.message}});
  return out;
}

// --- handler -----------------------------------------------------------------

ApiResponse api_error(int status, std::string code, std::string detail) {
  return {status, {{"status", status}, {"code", std::move(code)}, {"detail", std::move(detail)}}};
}

namespace {

struct BadRequest {
  std::string code;
  std::string detail;
};

std::vector<std::string_view> split_path(std::string_view path) {
  std::vector<std::string_view> parts;
  while (!path.empty()) {
    const auto slash = path.find('/');
    auto part = path.substr(0, slash);
    if (!part.empty()) parts.push_back(part);
    if (slash == std::string_view::npos) break;
    path.remove_prefix(slash + 1);
  }
  return parts;
}

std::optional<std::string> query_value(const QueryParams& q, std::string_view key) {
  auto it = q.find(key);
  if (it == q.end()) return std::nullopt;
  return it->second;
}

std::size_t count_param(const QueryParams& q, std::string_view key, std::size_t fallback) {
  auto raw = query_value(q, key);
  if (!raw) return fallback;
  std::size_t n = 0;
  auto [end, ec] = std::from_chars(raw->data(), raw->data() + raw->size(), n);
  if (ec != std::errc() || end != raw->data() + raw->size()) {
    throw BadRequest{"malformed_parameter", std::string(key) + " must be a non-negative integer"};
  }
  return n;
}

std::optional<Instant> instant_param(const QueryParams& q, std::string_view key) {
  auto raw = query_value(q, key);
  if (!raw) return std::nullopt;
  auto t = parse_instant(*raw);
  if (!t) throw BadRequest{"malformed_window", std::string(key) + " is not an ISO-8601 instant: " + *raw};
  return t;
}

TimeWindow window_param(const QueryParams& q) {
  TimeWindow w = TimeWindow::everything();
  if (auto from = instant_param(q, "from")) w.from = *from;
  if (auto to = instant_param(q, "to")) w.to = *to;
  if (!(w.from < w.to)) throw BadRequest{"malformed_window", "from must be before to"};
  return w;
}

template <typename T>
json page(const std::vector<T>& items, const QueryParams& q, json (*to_json)(const T&)) {
  const std::size_t offset = count_param(q, "offset", 0);
  const std::size_t limit = count_param(q, "limit", items.size());
  json out = json::array();
  for (std::size_t i = offset; i < items.size() && i - offset < limit; ++i) out.push_back(to_json(items[i]));
  return out;
}

json parse_body(std::string_view body, bool allow_empty) {
  if (body.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    if (allow_empty) return json::object();
    throw BadRequest{"malformed_body", "request body is empty"};
  }
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw BadRequest{"malformed_body", "request body is not valid JSON"};
  return j;
}

json alert_json(const Alert& a) { return alert_to_json(a); }

}  // namespace

ApiHandler::ApiHandler(Engine& engine, Options options) : engine_(engine), options_(std::move(options)) {}

ApiResponse ApiHandler::handle(std::string_view method, std::string_view path, const QueryParams& query,
                               std::string_view body) {
  const auto parts = split_path(path);
  const auto n = parts.size();
  auto route = [&](std::initializer_list<std::string_view> pattern) {
    if (pattern.size() != n) return false;
    std::size_t i = 0;
    for (auto p : pattern) {
      if (p != "*" && p != parts[i]) return false;
      ++i;
    }
    return true;
  };
  auto allowed = [&](std::string_view m) { return method == m; };
  try {
    if (route({"health"})) return allowed("GET") ? health() : api_error(405, "method_not_allowed", "use GET");
    if (route({"assessment", "current"})) {
      return allowed("GET") ? current_assessment() : api_error(405, "method_not_allowed", "use GET");
    }
    if (route({"assessment", "history"})) {
      return allowed("GET") ? history(query) : api_error(405, "method_not_allowed", "use GET");
    }
    if (route({"drilldown", "*"})) {
      return allowed("GET") ? drilldown_of(parts[1], query) : api_error(405, "method_not_allowed", "use GET");
    }
    if (route({"alerts"})) return allowed("GET") ? alerts(query) : api_error(405, "method_not_allowed", "use GET");
    if (route({"alerts", "*", "ack"})) {
      return allowed("POST") ? acknowledge(parts[1]) : api_error(405, "method_not_allowed", "use POST");
    }
    if (route({"model"})) {
      if (allowed("GET")) return model();
      if (allowed("PUT")) return put_model(body);
      return api_error(405, "method_not_allowed", "use GET or PUT");
    }
    if (route({"ingest", "*"})) {
      return allowed("POST") ? ingest(parts[1], query, body) : api_error(405, "method_not_allowed", "use POST");
    }
    if (route({"assess"})) return allowed("POST") ? assess(body) : api_error(405, "method_not_allowed", "use POST");
    if (route({"whatif"})) return allowed("POST") ? what_if(body) : api_error(405, "method_not_allowed", "use POST");
    return api_error(404, "not_found", "no endpoint " + std::string(method) + " " + std::string(path));
  } catch (const BadRequest& e) {
    return api_error(400, e.code, e.detail);
  } catch (const RecordError& e) {
    return api_error(400, "invalid_record", e.what());
  } catch (const StoreError& e) {
    return api_error(500, "store_failure", e.what());
  } catch (const std::exception& e) {
    spdlog::error("{} {} failed: {}", method, path, e.what());
    return api_error(500, "internal_error", e.what());
  }
}

ApiResponse ApiHandler::health() {
  const auto& store = engine_.store();
  return {200,
          {{"status", "ok"},
           {"raw_records", store.raw_count()},
           {"snapshots", store.snapshot_count()},
           {"project", store.project()}}};
}

ApiResponse ApiHandler::current_assessment() {
  auto latest = engine_.store().latest_snapshot();
  if (!latest) return api_error(404, "no_assessment", "no assessment has been run yet");
  return {200, snapshot_to_json(*latest)};
}

ApiResponse ApiHandler::history(const QueryParams& query) {
  auto element = query_value(query, "element");
  if (!element || element->empty()) throw BadRequest{"missing_parameter", "element is required"};
  const TimeWindow window = window_param(query);
  const auto points = engine_.store().element_series(*element, window);
  if (points.empty() && !engine_.model()->stratum_of(*element)) {
    return api_error(404, "unknown_element", "unknown element '" + *element + "'");
  }
  const std::size_t offset = count_param(query, "offset", 0);
  const std::size_t limit = count_param(query, "limit", points.size());
  std::vector<SeriesPoint> paged;
  for (std::size_t i = offset; i < points.size() && i - offset < limit; ++i) paged.push_back(points[i]);
  json body = series_to_json(*element, paged);
  body["total"] = points.size();
  return {200, body};
}

ApiResponse ApiHandler::drilldown_of(std::string_view element, const QueryParams& query) {
  std::optional<Snapshot> snap;
  if (auto id = query_value(query, "snapshot")) {
    snap = engine_.store().find_snapshot(*id);
    if (!snap) return api_error(404, "unknown_snapshot", "unknown snapshot '" + *id + "'");
  } else {
    snap = engine_.store().latest_snapshot();
  }
  const auto model = engine_.model();
  if (!model->stratum_of(element) || (snap && !snap->find(std::string(element)))) {
    return api_error(404, "unknown_element", "unknown element '" + std::string(element) + "'");
  }
  if (!snap) return api_error(404, "no_assessment", "no assessment has been run yet");
  return {200, drilldown_to_json(drilldown(*snap, std::string(element), *model))};
}

ApiResponse ApiHandler::alerts(const QueryParams& query) {
  const auto since = instant_param(query, "since");
  const auto all = engine_.store().query_alerts(since);
  return {200, {{"alerts", page(all, query, &alert_json)}, {"total", all.size()}}};
}

ApiResponse ApiHandler::model() { return {200, model_to_json(*engine_.model())}; }

ApiResponse ApiHandler::ingest(std::string_view format_name, const QueryParams& query, std::string_view body) {
  const auto format = input_format_from_string(format_name);
  if (!format) return api_error(404, "unknown_format", "unknown input format '" + std::string(format_name) + "'");
  IngestContext ctx;
  ctx.project = options_.project;
  ctx.build_id = query_value(query, "build_id").value_or("");
  ctx.default_timestamp = instant_param(query, "timestamp").value_or(options_.clock());
  ParseResult parsed;
  try {
    parsed = parse_input(*format, body, ctx, options_.log_pattern);
  } catch (const IngestError& e) {
    return api_error(400, "unparseable_input", e.what());
  }
  const AppendResult appended = engine_.store().append(parsed.records);
  return {200,
          {{"inserted", appended.inserted},
           {"duplicates", appended.duplicates},
           {"skipped", parsed.skipped},
           {"warnings", parsed.warnings}}};
}

AssessmentRequest ApiHandler::request_from(const json& body, Trigger trigger) const {
  const Instant now = options_.clock();
  int days = options_.window_days;
  try {
    if (body.contains("from") || body.contains("to")) {
      auto from = body.contains("from") ? parse_instant(body.at("from").get<std::string>()) : std::nullopt;
      auto to = body.contains("to") ? parse_instant(body.at("to").get<std::string>()) : std::optional<Instant>(now);
      if (!from || !to || !(*from < *to)) throw BadRequest{"malformed_window", "from/to must be instants with from < to"};
      return {{*from, *to}, trigger};
    }
    if (body.contains("window_days")) days = body.at("window_days").get<int>();
  } catch (const json::exception&) {
    throw BadRequest{"malformed_window", "window fields have the wrong type"};
  }
  if (days < 1) throw BadRequest{"malformed_window", "window_days must be at least 1"};
  return AssessmentRequest::trailing(now, days, trigger);
}

ApiResponse ApiHandler::assess(std::string_view body) {
  const AssessmentRequest request = request_from(parse_body(body, true), Trigger::manual);
  try {
    const auto result = engine_.run_assessment(request, options_.clock());
    json alerts = json::array();
    for (const auto& a : result.alerts) alerts.push_back(alert_to_json(a));
    return {200,
            {{"snapshot_id", result.snapshot.snapshot_id},
             {"evaluated_at", format_instant(result.snapshot.evaluated_at)},
             {"alerts", alerts}}};
  } catch (const AssessmentBusy& e) {
    return api_error(409, "assessment_running", e.what());
  }
}

ApiResponse ApiHandler::put_model(std::string_view body) {
  QualityModel next;
  try {
    next = parse_model_unchecked(body);
  } catch (const ModelError& e) {
    return api_error(400, "malformed_model", e.what());
  }
  try {
    engine_.replace_model(std::move(next));
  } catch (const ValidationError& e) {
    auto response = api_error(422, "validation_failed", violations_text(e.violations()));
    response.body["violations"] = violations_to_json(e.violations());
    return response;
  }
  return {200, model_to_json(*engine_.model())};
}

ApiResponse ApiHandler::what_if(std::string_view body) {
  json j = parse_body(body, true);
  if (!j.is_object()) throw BadRequest{"malformed_body", "what-if body must be an object"};
  json window = json::object();
  for (const char* key : {"from", "to", "window_days"}) {
    if (j.contains(key)) {
      window[key] = j[key];
      j.erase(key);
    }
  }
  const AssessmentRequest request = request_from(window, Trigger::manual);
  try {
    const WhatIfDelta delta = delta_from_json(j);
    return {200, snapshot_to_json(engine_.what_if(request, delta, options_.clock()))};
  } catch (const ValidationError& e) {
    auto response = api_error(422, "validation_failed", violations_text(e.violations()));
    response.body["violations"] = violations_to_json(e.violations());
    return response;
  } catch (const ModelError& e) {
    return api_error(422, "invalid_delta", e.what());
  }
}

ApiResponse ApiHandler::acknowledge(std::string_view alert_id) {
  if (!engine_.store().acknowledge_alert(alert_id)) {
    return api_error(404, "unknown_alert", "unknown alert '" + std::string(alert_id) + "'");
  }
  for (const auto& a : engine_.store().query_alerts()) {
    if (a.alert_id == alert_id) return {200, alert_to_json(a)};
  }
  return api_error(404, "unknown_alert", "unknown alert '" + std::string(alert_id) + "'");
}

// --- HTTP transport ----------------------------------------------------------

struct ApiServer::Impl {
  httplib::Server server;
  ApiHandler& handler;
  std::string cors_origin;
  int port = -1;

  Impl(ApiHandler& h, std::string cors) : handler(h), cors_origin(std::move(cors)) {}

  void dispatch(const httplib::Request& req, httplib::Response& res) {
    QueryParams query;
    for (const auto& [k, v] : req.params) query.emplace(k, v);
    const ApiResponse r = handler.handle(req.method, req.path, query, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  }
};

ApiServer::ApiServer(ApiHandler& handler, std::string cors_origin)
    : impl_(std::make_unique<Impl>(handler, std::move(cors_origin))) {
  auto& srv = impl_->server;
  Impl* impl = impl_.get();
  srv.set_default_headers({{"Access-Control-Allow-Origin", impl->cors_origin},
                           {"Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type"}});
  auto handler_fn = [impl](const httplib::Request& req, httplib::Response& res) { impl->dispatch(req, res); };
  srv.Get(".*", handler_fn);
  srv.Post(".*", handler_fn);
  srv.Put(".*", handler_fn);
  srv.Delete(".*", handler_fn);
  srv.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
  auto& srv = impl_->server;
  const int bound = port == 0 ? srv.bind_to_any_port(host) : (srv.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  impl_->port = bound;
  return bound;
}

void ApiServer::run() {
  if (impl_->port < 0) throw std::runtime_error("server is not bound");
  impl_->server.listen_after_bind();
}

void ApiServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

bool ApiServer::running() const { return impl_->server.is_running(); }

// --- service -----------------------------------------------------------------

Service::Service(const ServiceConfig& config) : config_(config) {
  std::ifstream in(config.model);
  if (!in) throw std::runtime_error("cannot read model " + config.model.string());
  std::stringstream text;
  text << in.rdbuf();
  QualityModel model = parse_model(text.str());
  validate_log_pattern(config.log_pattern);
  store_ = std::make_unique<Store>(config.store, Store::Mode::read_write, config.project);
  engine_ = std::make_unique<Engine>(std::move(model), *store_);
  ApiHandler::Options options;
  options.window_days = config.window_days;
  options.project = config.project;
  options.log_pattern = config.log_pattern;
  handler_ = std::make_unique<ApiHandler>(*engine_, options);
  server_ = std::make_unique<ApiServer>(*handler_, config.cors_origin);
  port_ = server_->bind(config.host, config.port);
}

Service::~Service() { stop(); }

void Service::run() {
  const int days = config_.window_days;
  Engine& engine = *engine_;
  AssessmentScheduler scheduler(std::chrono::minutes(config_.period_minutes), now_utc(), [&engine, days](Instant tick) {
    try {
      engine.run_assessment(AssessmentRequest::trailing(tick, days, Trigger::scheduled), tick);
    } catch (const AssessmentBusy&) {
      spdlog::warn("scheduled assessment at {} skipped: a run is active", format_instant(tick));
    }
  });
  scheduler.start_realtime();
  spdlog::info("serving on {}:{}", config_.host, port_);
  if (!stop_requested_) server_->run();
  scheduler.cancel();
  scheduler.wait_idle();
}

void Service::stop() {
  stop_requested_ = true;
  if (server_) server_->stop();
}

}  // namespace qgauge
