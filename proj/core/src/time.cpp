#include "qgauge/time.hpp"

#include <charconv>
#include <ctime>
#include <iomanip>
#include <limits>
#include <sstream>

namespace qgauge {

namespace {

bool read_int(std::string_view text, std::size_t& pos, std::size_t digits, int& out) {
  if (pos + digits > text.size()) return false;
  const char* first = text.data() + pos;
  auto [ptr, ec] = std::from_chars(first, first + digits, out);
  if (ec != std::errc{} || ptr != first + digits) return false;
  pos += digits;
  return true;
}

bool expect(std::string_view text, std::size_t& pos, char c) {
  if (pos >= text.size() || text[pos] != c) return false;
  ++pos;
  return true;
}

std::optional<Instant> make_instant(int y, int mo, int d, int h, int mi, int s) {
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 60) {
    return std::nullopt;
  }
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

}  // namespace

TimeWindow TimeWindow::trailing_days(Instant to, int days) {
  return {to - std::chrono::days{days}, to};
}

TimeWindow TimeWindow::everything() {
  using namespace std::chrono;
  return {sys_days{year{1}/1/1}, sys_days{year{9999}/12/31}};
}

std::optional<Instant> parse_instant(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  std::size_t pos = 0;
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  if (!read_int(text, pos, 4, y) || !expect(text, pos, '-') || !read_int(text, pos, 2, mo) ||
      !expect(text, pos, '-') || !read_int(text, pos, 2, d)) {
    return std::nullopt;
  }
  if (pos == text.size()) return make_instant(y, mo, d, 0, 0, 0);
  if (text[pos] != 'T' && text[pos] != ' ') return std::nullopt;
  ++pos;
  if (!read_int(text, pos, 2, h) || !expect(text, pos, ':') || !read_int(text, pos, 2, mi)) {
    return std::nullopt;
  }
  if (pos < text.size() && text[pos] == ':') {
    ++pos;
    if (!read_int(text, pos, 2, s)) return std::nullopt;
    if (pos < text.size() && (text[pos] == '.' || text[pos] == ',')) {
      ++pos;
      const std::size_t start = pos;
      while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
      if (pos == start) return std::nullopt;
    }
  }
  auto base = make_instant(y, mo, d, h, mi, s);
  if (!base) return std::nullopt;
  if (pos == text.size()) return base;
  if (text[pos] == 'Z' || text[pos] == 'z') {
    return pos + 1 == text.size() ? base : std::nullopt;
  }
  if (text[pos] != '+' && text[pos] != '-') return std::nullopt;
  const int sign = text[pos] == '+' ? 1 : -1;
  ++pos;
  int oh = 0, om = 0;
  if (!read_int(text, pos, 2, oh)) return std::nullopt;
  if (pos < text.size() && text[pos] == ':') ++pos;
  if (pos < text.size() && !read_int(text, pos, 2, om)) return std::nullopt;
  if (pos != text.size() || oh > 23 || om > 59) return std::nullopt;
  return *base - std::chrono::minutes{sign * (oh * 60 + om)};
}

std::optional<Instant> parse_instant(std::string_view text, std::string_view format) {
  std::tm tm{};
  std::istringstream in{std::string{text}};
  in >> std::get_time(&tm, std::string{format}.c_str());
  if (in.fail()) return std::nullopt;
  return make_instant(tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min,
                      tm.tm_sec);
}

std::string format_instant(Instant t) {
  using namespace std::chrono;
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  const hh_mm_ss hms{t - day_point};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

Instant now_utc() {
  return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
}

}  // namespace qgauge
