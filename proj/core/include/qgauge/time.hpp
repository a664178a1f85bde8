#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace qgauge {

/// All instants are UTC with one-second resolution.
using Instant = std::chrono::sys_seconds;

/// Half-open interval [from, to).
struct TimeWindow {
  Instant from;
  Instant to;

  bool contains(Instant t) const { return from <= t && t < to; }
  bool operator==(const TimeWindow&) const = default;

  /// [to - days, to)
  static TimeWindow trailing_days(Instant to, int days);
  static TimeWindow everything();
};

/// Accepts `YYYY-MM-DD`, `YYYY-MM-DDTHH:MM[:SS[.fff]]` with `T` or a space as
/// separator, and an optional `Z` or `+HH:MM`/`-HH:MM` suffix. Values without
/// a zone are taken as UTC; offsets are folded into the UTC instant.
std::optional<Instant> parse_instant(std::string_view text);

/// strptime-style parse (`%Y-%m-%d %H:%M:%S` and friends), interpreted as UTC.
std::optional<Instant> parse_instant(std::string_view text, std::string_view format);

/// `YYYY-MM-DDTHH:MM:SSZ`
std::string format_instant(Instant t);

Instant now_utc();

}  // namespace qgauge
