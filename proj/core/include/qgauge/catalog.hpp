#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qgauge/model.hpp"
#include "qgauge/types.hpp"

namespace qgauge {

enum class EntityKind { per_file, per_commit_window_file, per_test_run, scalar };

struct ParamSpec {
  std::string name;
  bool is_list = false;
  /// Absent means the model must supply the param.
  std::optional<ParamValue> default_value;
};

/// One catalog row: how an assessed metric derives its base value.
struct ExtractorSpec {
  std::string id;
  EntityKind entity = EntityKind::scalar;
  SourceKind source_kind = SourceKind::file_measure;
  std::vector<ParamSpec> params;
  UtilityFunction (*default_utility)(const Params&) = nullptr;

  std::vector<std::string> required_params() const;
};

const std::vector<ExtractorSpec>& extractor_catalog();
const ExtractorSpec* find_extractor(std::string_view id);

/// Params with catalog defaults filled in for anything the caller left out.
Params with_default_params(const ExtractorSpec& spec, Params params);

/// Default offender cap per metric.
inline constexpr int kDefaultTopN = 20;

}  // namespace qgauge
