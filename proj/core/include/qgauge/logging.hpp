#pragma once

#include <string_view>

namespace qgauge {

/// Routes library logging to stderr at `level` (trace, debug, info, warn,
/// error, off). Unknown levels fall back to info.
void configure_logging(std::string_view level);

}  // namespace qgauge
