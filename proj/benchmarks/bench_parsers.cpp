#include <string>

#include <benchmark/benchmark.h>

#include "qgauge/ingestion.hpp"

using namespace qgauge;

namespace {

std::string log_text(int lines) {
  std::string out;
  for (int i = 0; i < lines; ++i) {
    out += "2018-01-10T08:" + std::to_string(10 + i % 50) + ":00Z ";
    out += i % 7 ? "INFO src/server.cpp:12 request served\n" : "ERROR src/db.cpp:301 connection refused\n";
  }
  return out;
}

std::string commit_text(int commits) {
  std::string out;
  for (int i = 0; i < commits; ++i) {
    out += "commit c" + std::to_string(i) + "\nauthor Dev <dev@example.org>\ndate 2018-01-10T08:00:00Z\n\n";
    for (int f = 0; f < 5; ++f) out += "3\t1\tsrc/f" + std::to_string((i + f) % 50) + ".cpp\n";
    out += "\n";
  }
  return out;
}

std::string issue_text(int rows) {
  std::string out = "Key,Type,Status,Created,Updated,Resolved,Sprint,Description\n";
  for (int i = 0; i < rows; ++i) {
    out += "QR-" + std::to_string(i) + ",Bug,Open,2018-01-02,2018-01-03,,Sprint 1,\"text, with comma\"\n";
  }
  return out;
}

}  // namespace

static void BM_ParseLogs(benchmark::State& state) {
  const std::string text = log_text(static_cast<int>(state.range(0)));
  const LogPattern pattern = LogPattern::default_pattern();
  for (auto _ : state) benchmark::DoNotOptimize(parse_log_lines(text, pattern));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ParseLogs)->Arg(1000)->Arg(10000);

static void BM_ParseCommits(benchmark::State& state) {
  const std::string text = commit_text(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(parse_commit_log(text));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ParseCommits)->Arg(1000);

static void BM_ParseIssues(benchmark::State& state) {
  const std::string text = issue_text(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(parse_issue_csv(text));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ParseIssues)->Arg(1000);
