#include "qgauge/logging.hpp"

#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace qgauge {

void configure_logging(std::string_view level) {
  auto logger = spdlog::get("qgauge");
  if (!logger) logger = spdlog::stderr_color_mt("qgauge");
  spdlog::set_default_logger(logger);
  auto parsed = spdlog::level::from_str(std::string(level));
  if (parsed == spdlog::level::off && level != "off") parsed = spdlog::level::info;
  spdlog::set_level(parsed);
}

}  // namespace qgauge
