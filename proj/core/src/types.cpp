#include "qgauge/types.hpp"

#include <array>
#include <utility>

namespace qgauge {

namespace {

constexpr std::array<std::pair<Stratum, std::string_view>, 3> kStrata{{
    {Stratum::metric, "metric"},
    {Stratum::factor, "factor"},
    {Stratum::aspect, "aspect"},
}};

constexpr std::array<std::pair<Color, std::string_view>, 4> kColors{{
    {Color::green, "green"},
    {Color::orange, "orange"},
    {Color::red, "red"},
    {Color::no_data, "no-data"},
}};

constexpr std::array<std::pair<SourceKind, std::string_view>, 7> kKinds{{
    {SourceKind::file_measure, "file_measure"},
    {SourceKind::commit, "commit"},
    {SourceKind::test_run, "test_run"},
    {SourceKind::issue, "issue"},
    {SourceKind::log_entry, "log_entry"},
    {SourceKind::usage_event, "usage_event"},
    {SourceKind::availability_sample, "availability_sample"},
}};

template <typename Table, typename E>
std::string_view name_of(const Table& table, E value) {
  for (const auto& [v, name] : table) {
    if (v == value) return name;
  }
  return "?";
}

template <typename E, typename Table>
std::optional<E> value_of(const Table& table, std::string_view name) {
  for (const auto& [v, n] : table) {
    if (n == name) return v;
  }
  return std::nullopt;
}

std::string join_messages(const std::vector<Violation>& violations) {
  std::string out = "model validation failed";
  for (const auto& v : violations) {
    out += "\n  ";
    out += v.message;
  }
  return out;
}

}  // namespace

std::string_view to_string(Stratum s) { return name_of(kStrata, s); }
std::string_view to_string(Color c) { return name_of(kColors, c); }
std::string_view to_string(SourceKind k) { return name_of(kKinds, k); }

std::optional<Stratum> stratum_from_string(std::string_view s) {
  return value_of<Stratum>(kStrata, s);
}
std::optional<Color> color_from_string(std::string_view s) { return value_of<Color>(kColors, s); }
std::optional<SourceKind> source_kind_from_string(std::string_view s) {
  return value_of<SourceKind>(kKinds, s);
}

bool is_deterioration(Color from, Color to) {
  if (from == Color::no_data || to == Color::no_data) return false;
  return static_cast<int>(to) > static_cast<int>(from);
}

ValidationError::ValidationError(std::vector<Violation> violations)
    : std::runtime_error(join_messages(violations)), violations_(std::move(violations)) {}

}  // namespace qgauge
