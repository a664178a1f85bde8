#include "support/oracles.hpp"

#include <algorithm>
#include <functional>

namespace qgauge::testing {

ValueMap brute_force_evaluate(const QualityModel& model, const ValueMap& metric_values) {
  ValueMap memo = metric_values;
  std::function<std::optional<double>(const std::string&)> value = [&](const std::string& id) {
    if (auto it = memo.find(id); it != memo.end()) return it->second;
    long double numerator = 0.0L;
    long double denominator = 0.0L;
    for (const auto& e : model.edges) {
      if (e.parent_id != id) continue;
      if (auto v = value(e.child_id)) {
        numerator += static_cast<long double>(e.weight) * static_cast<long double>(*v);
        denominator += static_cast<long double>(e.weight);
      }
    }
    std::optional<double> out;
    if (denominator > 0.0L) out = static_cast<double>(numerator / denominator);
    memo[id] = out;
    return out;
  };
  for (const auto& f : model.factors) value(f.id);
  for (const auto& a : model.aspects) value(a.id);
  return memo;
}

namespace {

std::vector<double> random_weights(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> dist(0.05, 1.0);
  std::vector<double> w(n);
  double sum = 0.0;
  for (auto& x : w) sum += (x = dist(rng));
  for (auto& x : w) x /= sum;
  return w;
}

/// Each parent gets a non-empty child subset; every child gets a parent.
std::vector<std::pair<int, int>> random_links(std::mt19937_64& rng, int parents, int children) {
  std::bernoulli_distribution pick(0.35);
  std::vector<std::vector<bool>> link(parents, std::vector<bool>(children, false));
  for (int p = 0; p < parents; ++p) {
    for (int c = 0; c < children; ++c) link[p][c] = pick(rng);
    if (std::none_of(link[p].begin(), link[p].end(), [](bool b) { return b; })) {
      link[p][std::uniform_int_distribution<int>(0, children - 1)(rng)] = true;
    }
  }
  for (int c = 0; c < children; ++c) {
    bool has_parent = false;
    for (int p = 0; p < parents; ++p) has_parent = has_parent || link[p][c];
    if (!has_parent) link[std::uniform_int_distribution<int>(0, parents - 1)(rng)][c] = true;
  }
  std::vector<std::pair<int, int>> out;
  for (int p = 0; p < parents; ++p) {
    for (int c = 0; c < children; ++c) {
      if (link[p][c]) out.emplace_back(p, c);
    }
  }
  return out;
}

}  // namespace

RandomDag random_dag(std::mt19937_64& rng, int max_nodes) {
  const int n = std::uniform_int_distribution<int>(3, max_nodes)(rng);
  const int aspects = std::uniform_int_distribution<int>(1, std::min(5, n - 2))(rng);
  const int factors = std::uniform_int_distribution<int>(1, std::max(1, (n - aspects) / 2))(rng);
  const int metrics = n - aspects - factors;

  RandomDag dag;
  auto& m = dag.model;
  for (int i = 0; i < aspects; ++i) m.aspects.push_back({"a" + std::to_string(i), "", {}});
  for (int i = 0; i < factors; ++i) m.factors.push_back({"f" + std::to_string(i), "", {}});
  for (int i = 0; i < metrics; ++i) {
    MetricDef def;
    def.id = "m" + std::to_string(i);
    def.extractor = "passed_tests";
    def.source_kind = SourceKind::test_run;
    def.utility = PiecewiseLinear{{{0.0, 0.0}, {1.0, 1.0}}};
    def.params = {{"top_n", 20.0}};
    m.metrics.push_back(def);
  }
  auto add_edges = [&](const std::vector<ElementDef>& parents, auto child_id, int child_count) {
    const auto links = random_links(rng, static_cast<int>(parents.size()), child_count);
    for (std::size_t p = 0; p < parents.size(); ++p) {
      std::vector<std::string> kids;
      for (const auto& [pi, ci] : links) {
        if (pi == static_cast<int>(p)) kids.push_back(child_id(ci));
      }
      const auto weights = random_weights(rng, kids.size());
      for (std::size_t k = 0; k < kids.size(); ++k) m.edges.push_back({parents[p].id, kids[k], weights[k]});
    }
  };
  add_edges(m.factors, [&](int c) { return m.metrics[c].id; }, metrics);
  add_edges(m.aspects, [&](int c) { return m.factors[c].id; }, factors);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> kind(0, 9);
  for (const auto& def : m.metrics) {
    const int k = kind(rng);
    std::optional<double> v;
    if (k <= 1) {
      v = std::nullopt;
    } else if (k == 2) {
      v = 0.0;
    } else if (k == 3) {
      v = 1.0;
    } else {
      v = unit(rng);
    }
    dag.metric_values[def.id] = v;
  }
  return dag;
}

std::map<std::string, double> demo_window2_expected() {
  // Counts enumerated by hand from data/demo/window2.
  const double non_complex = 5.0 / 5;           // every file's mean CC below 10
  const double commented = 4.0 / 5;             // Export.java has no comments
  const double duplications = 4.0 / 5;          // Ledger.java 40/200 = 20% duplicated
  const double fulfillment = 1.0 / 5;           // only MainView.java lacks blocker/critical
  const double highly_changed = 2.0 / 3;        // Invoice 6 commits; Ledger 2, MainView 1
  const double passed = ((100.0 - 10 - 5 - 5) / 90 + 30.0 / 50) / 2;
  const double fast = 0.0;                      // 320 s and 400 s, limit 300 s
  const double coverage = (1.0 + 60.0 / 80 + 40.0 / 80 + 20.0 / 80 + 0.0) / 5;
  const double non_bug = 1.0 - 5.0 / 10;        // 5 open bugs among 10 issues
  const double errors = 0.0;                    // 10 ERROR + 2 FATAL, zero at 10
  const double availability = 0.0;              // 97% uptime, floor 99%
  const double usage = 4.0 / 5;                 // share never used
  const double resolved_dated = 4.0 / 5;        // I-207 undated
  const double specified = 1.0 - 2.0 / 10;      // I-201 no assignee, I-207 no due date

  std::map<std::string, double> v{
      {"non_complex_files", non_complex},
      {"commented_files", commented},
      {"absence_of_duplications", duplications},
      {"fulfillment_critical_blocker_rules", fulfillment},
      {"highly_changed_files", highly_changed},
      {"passed_tests", passed},
      {"fast_test_builds", fast},
      {"test_coverage", coverage},
      {"non_bug_density", non_bug},
      {"errors_at_runtime", errors},
      {"availability_uptime", availability},
      {"feature_usage", usage},
      {"resolved_issues_dated", resolved_dated},
      {"issues_completely_specified", specified},
  };
  v["code_quality"] = 0.5 * non_complex + 0.25 * commented + 0.25 * duplications;
  v["blocking_code"] = 0.5 * fulfillment + 0.5 * highly_changed;
  v["testing_status"] = 0.4 * passed + 0.3 * fast + 0.3 * coverage;
  v["software_stability"] = 0.4 * non_bug + 0.3 * errors + 0.3 * availability;
  v["software_usage"] = usage;
  v["issues_velocity"] = 0.5 * resolved_dated + 0.5 * specified;
  v["maintainability"] = 0.5 * v["code_quality"] + 0.5 * v["blocking_code"];
  v["reliability"] = 0.5 * v["testing_status"] + 0.5 * v["software_stability"];
  v["functional_suitability"] = v["software_usage"];
  v["productivity"] = v["issues_velocity"];
  return v;
}

}  // namespace qgauge::testing
