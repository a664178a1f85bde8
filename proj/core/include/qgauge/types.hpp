#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qgauge {

enum class Stratum { metric, factor, aspect };

/// Traffic-light color. Declaration order is the severity order used for
/// deterioration checks; no_data is outside that order.
enum class Color { green, orange, red, no_data };

enum class SourceKind {
  file_measure,
  commit,
  test_run,
  issue,
  log_entry,
  usage_event,
  availability_sample,
};

std::string_view to_string(Stratum s);
std::string_view to_string(Color c);
std::string_view to_string(SourceKind k);

std::optional<Stratum> stratum_from_string(std::string_view s);
std::optional<Color> color_from_string(std::string_view s);
std::optional<SourceKind> source_kind_from_string(std::string_view s);

/// true when `to` is strictly worse than `from` (green < orange < red).
/// Transitions involving no_data are never a deterioration.
bool is_deterioration(Color from, Color to);

/// One broken model rule. `element` is the offending id (or parent id for
/// weight rules).
struct Violation {
  std::string element;
  std::string rule;
  std::string message;

  bool operator==(const Violation&) const = default;
};

/// Malformed or structurally unusable model document.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The model parsed but breaks one or more invariants.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qgauge
