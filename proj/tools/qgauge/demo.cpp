#include <fstream>
#include <string_view>
#include <utility>
#include <vector>

#include "qgauge/assessment.hpp"
#include "qgauge/commands.hpp"
#include "qgauge/store.hpp"

namespace qgauge::cli {

const std::vector<std::pair<std::string_view, std::string_view>>& demo_files();

namespace {

struct DemoWindow {
  const char* dir;
  TimeWindow window;
};

struct DemoInput {
  const char* file;
  InputFormat format;
};

constexpr DemoInput kInputs[] = {
    {"static.json", InputFormat::static_analysis}, {"commits.log", InputFormat::commits},
    {"junit.xml", InputFormat::testxml},           {"issues.csv", InputFormat::issues},
    {"app.log", InputFormat::logs},                {"records.jsonl", InputFormat::records},
};

Instant day(int y, unsigned m, unsigned d) {
  return std::chrono::sys_days(std::chrono::year(y) / std::chrono::month(m) / std::chrono::day(d));
}

std::string_view demo_file(std::string_view name) {
  for (const auto& [path, content] : demo_files()) {
    if (path == name) return content;
  }
  throw std::runtime_error("demo file missing: " + std::string(name));
}

void write_file(const fs::path& path, std::string_view content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

int cmd_demo(const fs::path& target, Output io) {
  const DemoWindow windows[] = {
      {"window1", {day(2018, 1, 1), day(2018, 1, 15)}},
      {"window2", {day(2018, 1, 15), day(2018, 1, 29)}},
  };
  try {
    for (const auto& [path, content] : demo_files()) {
      const fs::path dest = path == "model.json" ? target / path : target / "data" / path;
      write_file(dest, content);
    }
    write_file(target / "config.json",
               nlohmann::json{{"store", "store"}, {"model", "model.json"}, {"period_minutes", 60},
                              {"window_days", 14}, {"port", 8080}}
                       .dump(2) +
                   "\n");

    QualityModel model = parse_model(demo_file("model.json"));
    Store store(target / "store");
    Engine engine(model, store);
    io.out << "demo project in " << target.string() << "\n";

    std::optional<Snapshot> last;
    for (const auto& w : windows) {
      std::size_t inserted = 0;
      std::size_t duplicates = 0;
      for (const auto& input : kInputs) {
        IngestContext ctx;
        ctx.default_timestamp = w.window.from;
        const std::string name = std::string(w.dir) + "/" + input.file;
        const ParseResult parsed = parse_input(input.format, demo_file(name), ctx);
        for (const auto& warning : parsed.warnings) io.err << "warning: " << name << ": " << warning << "\n";
        const AppendResult r = store.append(parsed.records);
        inserted += r.inserted;
        duplicates += r.duplicates;
      }
      io.out << "\n== " << w.dir << " [" << format_instant(w.window.from) << ", " << format_instant(w.window.to)
             << ")\n";
      io.out << "ingested: inserted " << inserted << ", duplicates " << duplicates << "\n";
      const auto result = engine.run_assessment({w.window, Trigger::manual}, w.window.to);
      io.out << "assessment " << result.snapshot.snapshot_id << "\n";
      print_snapshot_table(io.out, result.snapshot, &model, false);
      if (result.alerts.empty()) io.out << "no alerts\n";
      for (const auto& a : result.alerts) io.out << format_alert(a) << "\n";
      last = result.snapshot;
    }

    for (const char* element : {"maintainability", "reliability"}) {
      io.out << "\ndrill-down " << element << "\n";
      print_drilldown(io.out, drilldown(*last, element, model), 3);
    }
    io.out << "\nstore: " << (target / "store").string() << "\n";
    return kOk;
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace qgauge::cli
