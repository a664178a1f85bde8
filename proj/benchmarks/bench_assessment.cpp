#include <fstream>
#include <random>
#include <sstream>

#include <benchmark/benchmark.h>

#include "qgauge/assessment.hpp"

using namespace qgauge;

namespace {

QualityModel demo_model() {
  std::ifstream in(std::string(QGAUGE_SOURCE_DIR) + "/models/demo-model.json");
  std::stringstream s;
  s << in.rdbuf();
  return parse_model(s.str());
}

Instant day(int d) { return std::chrono::sys_days(std::chrono::year(2018) / 1 / 1) + std::chrono::days(d); }

/// Synthetic project activity: `files` files measured daily, a commit per
/// file-day with probability 1/4, nightly test runs and a few logs.
std::vector<RawRecord> synthetic_records(int files, int days) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> cc(1, 20);
  std::uniform_int_distribution<int> quarter(0, 3);
  std::vector<RawRecord> out;
  for (int d = 0; d < days; ++d) {
    CommitRecord commit;
    commit.revision = "c" + std::to_string(d);
    for (int f = 0; f < files; ++f) {
      FileMeasure m;
      m.path = "src/f" + std::to_string(f) + ".cpp";
      m.loc = 200;
      m.comment_lines = 30;
      m.duplicated_lines = quarter(rng) * 5;
      m.function_complexities = {cc(rng), cc(rng), cc(rng)};
      m.line_coverage = 70.0 + quarter(rng) * 5;
      if (quarter(rng) == 0) m.violations.push_back({"r", Severity::critical, std::nullopt});
      out.push_back({m.path + "@" + std::to_string(d), "default", day(d), m});
      if (quarter(rng) == 0) commit.files.push_back({m.path, 3, 1});
    }
    out.push_back({commit.revision, "default", day(d), commit});
    out.push_back({"t" + std::to_string(d), "default", day(d), TestRun{"b", "suite", 100, 1, 2, 3, 120.0}});
    out.push_back({"l" + std::to_string(d), "default", day(d), LogEntry{LogLevel::error, "a.cpp", 1, "x"}});
  }
  return out;
}

}  // namespace

static void BM_EvaluateRecords(benchmark::State& state) {
  const QualityModel model = demo_model();
  const auto records = synthetic_records(static_cast<int>(state.range(0)), 14);
  const TimeWindow w{day(0), day(14)};
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_records(model, records, w, w.to));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(records.size()));
}
BENCHMARK(BM_EvaluateRecords)->Arg(10)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_AssembleSnapshot(benchmark::State& state) {
  const QualityModel model = demo_model();
  std::map<std::string, MetricValue> values;
  double v = 0.1;
  for (const auto& m : model.metrics) {
    values[m.id] = {m.id, v, 1, {}, {}};
    v += 0.05;
  }
  const TimeWindow w{day(0), day(14)};
  for (auto _ : state) benchmark::DoNotOptimize(assemble_snapshot(model, values, w, w.to));
}
BENCHMARK(BM_AssembleSnapshot);
