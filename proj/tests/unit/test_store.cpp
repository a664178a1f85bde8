#include <gtest/gtest.h>

#include <fstream>
#include <thread>

#include "qgauge/store.hpp"
#include "support/fixtures.hpp"

using namespace qgauge;
using namespace qgauge::testing;

namespace {

RawRecord commit(const std::string& rev, const std::string& when) {
  return {rev, "default", at(when), CommitRecord{rev, "me", {{"a.cpp", 1, 0}}}};
}

Snapshot snapshot_at(const std::string& when, double value) {
  Snapshot s;
  s.evaluated_at = at(when);
  s.window = TimeWindow::trailing_days(s.evaluated_at, 14);
  s.entries["a"] = {Stratum::aspect, value, Color::green, {{"children", 1}}, 0, {}};
  s.entries["m"] = {Stratum::metric, value, Color::green, {{"entities", 2}}, 2, {{"x.cpp", 3, 0.5}}};
  return s;
}

Alert alert(const std::string& id, const std::string& when) {
  Alert a;
  a.alert_id = id;
  a.element_id = "a";
  a.previous_color = Color::green;
  a.new_color = Color::red;
  a.value = 0.1;
  a.threshold_crossed = ThresholdCrossed::critical;
  a.evaluated_at = at(when);
  a.snapshot_id = "s";
  return a;
}

}  // namespace

TEST(Store, AppendSkipsDuplicateIds) {
  TempDir dir;
  Store store(dir / "s");
  const std::vector<RawRecord> batch = {commit("b", "2018-01-02"), commit("a", "2018-01-01"),
                                        commit("a", "2018-01-01")};
  EXPECT_EQ(store.append(batch), (AppendResult{2, 1}));
  EXPECT_EQ(store.append(batch), (AppendResult{0, 3}));
  EXPECT_EQ(store.raw_count(), 2u);
}

TEST(Store, QueryRawFiltersByKindAndWindowInOrder) {
  TempDir dir;
  Store store(dir / "s");
  std::vector<RawRecord> batch = {commit("c", "2018-01-03"), commit("a", "2018-01-01"),
                                  commit("b", "2018-01-03")};
  batch.push_back({"log", "default", at("2018-01-02"), LogEntry{LogLevel::info, {}, {}, "hi"}});
  store.append(batch);
  const auto got = store.query_raw(SourceKind::commit, {at("2018-01-01"), at("2018-01-04")});
  ASSERT_EQ(got.size(), 3u);
  EXPECT_EQ(got[0].record_id, "a");
  EXPECT_EQ(got[1].record_id, "b");
  EXPECT_EQ(got[2].record_id, "c");
  EXPECT_EQ(store.query_raw(SourceKind::commit, {at("2018-01-01"), at("2018-01-03")}).size(), 1u);
  EXPECT_EQ(store.query_raw(SourceKind::log_entry, TimeWindow::everything()).size(), 1u);
}

TEST(Store, RejectsInvalidRecords) {
  TempDir dir;
  Store store(dir / "s");
  const std::vector<RawRecord> bad = {{"t", "default", at("2018-01-01"), TestRun{"", "s", 1, 2, 0, 0, 0}}};
  EXPECT_THROW(store.append(bad), RecordError);
  EXPECT_EQ(store.raw_count(), 0u);
}

TEST(Store, SnapshotsPersistAndReload) {
  TempDir dir;
  std::string first_id;
  {
    Store store(dir / "s");
    first_id = store.save_snapshot(snapshot_at("2018-01-15", 0.5));
    store.save_snapshot(snapshot_at("2018-01-29", 0.75));
    EXPECT_THROW(store.save_snapshot(*store.find_snapshot(first_id)), StoreError);
  }
  Store store(dir / "s", Store::Mode::read_only);
  EXPECT_EQ(store.snapshot_count(), 2u);
  const auto first = store.find_snapshot(first_id);
  ASSERT_TRUE(first);
  EXPECT_TRUE(same_values(*first, snapshot_at("2018-01-15", 0.5)));
  EXPECT_EQ(first->entries.at("m").offenders.size(), 1u);
  EXPECT_EQ(store.latest_snapshot()->entries.at("a").value, 0.75);
  EXPECT_EQ(store.query_snapshots({at("2018-01-20"), at("2018-02-01")}).size(), 1u);
  const auto series = store.element_series("a", TimeWindow::everything());
  ASSERT_EQ(series.size(), 2u);
  EXPECT_EQ(series[0].value, 0.5);
  EXPECT_EQ(series[1].snapshot_id, store.latest_snapshot()->snapshot_id);
  EXPECT_TRUE(store.element_series("nope", TimeWindow::everything()).empty());
}

TEST(Store, SameInstantSnapshotsGetDistinctIds) {
  TempDir dir;
  Store store(dir / "s");
  EXPECT_NE(store.save_snapshot(snapshot_at("2018-01-15", 0.5)), store.save_snapshot(snapshot_at("2018-01-15", 0.5)));
}

TEST(Store, AlertsDeduplicateAndAcknowledge) {
  TempDir dir;
  {
    Store store(dir / "s");
    const std::vector<Alert> alerts = {alert("x", "2018-01-15"), alert("y", "2018-01-29")};
    EXPECT_EQ(store.append_alerts(alerts), 2u);
    EXPECT_EQ(store.append_alerts(alerts), 0u);
    EXPECT_TRUE(store.acknowledge_alert("x"));
    EXPECT_TRUE(store.acknowledge_alert("x"));
    EXPECT_FALSE(store.acknowledge_alert("zz"));
    EXPECT_EQ(store.query_alerts(at("2018-01-20")).size(), 1u);
  }
  Store store(dir / "s", Store::Mode::read_only);
  const auto alerts = store.query_alerts();
  ASSERT_EQ(alerts.size(), 2u);
  EXPECT_TRUE(alerts[0].acknowledged);
  EXPECT_FALSE(alerts[1].acknowledged);
  EXPECT_EQ(alerts[1], alert("y", "2018-01-29"));
}

TEST(Store, ReadOnlyRefusesWritesAndMissingDirectories) {
  TempDir dir;
  EXPECT_THROW(Store(dir / "missing", Store::Mode::read_only), StoreError);
  { Store create(dir / "s"); }
  Store store(dir / "s", Store::Mode::read_only);
  const std::vector<RawRecord> batch = {commit("a", "2018-01-01")};
  EXPECT_THROW(store.append(batch), StoreError);
  EXPECT_THROW(store.save_snapshot(snapshot_at("2018-01-15", 1)), StoreError);
  EXPECT_THROW(store.acknowledge_alert("x"), StoreError);
}

TEST(Store, SingleWriterPerDirectory) {
  TempDir dir;
  Store writer(dir / "s");
  EXPECT_THROW(Store(dir / "s"), StoreError);
  EXPECT_NO_THROW(Store(dir / "s", Store::Mode::read_only));
}

TEST(Store, TornTailIsDropped) {
  TempDir dir;
  {
    Store store(dir / "s");
    const std::vector<RawRecord> batch = {commit("a", "2018-01-01")};
    store.append(batch);
  }
  {
    std::ofstream raw(dir / "s" / "raw.jsonl", std::ios::app);
    raw << R"({"record_id": "half)";
  }
  {
    Store store(dir / "s");
    EXPECT_EQ(store.raw_count(), 1u);
    const std::vector<RawRecord> batch = {commit("b", "2018-01-02")};
    store.append(batch);
  }
  Store store(dir / "s", Store::Mode::read_only);
  EXPECT_EQ(store.raw_count(), 2u);
}

TEST(Store, ConcurrentReadersSeeConsistentPrefixes) {
  TempDir dir;
  Store store(dir / "s");
  std::atomic<bool> done{false};
  std::thread reader([&] {
    std::size_t last = 0;
    while (!done) {
      const auto n = store.query_raw(SourceKind::commit, TimeWindow::everything()).size();
      EXPECT_GE(n, last);
      EXPECT_EQ(n % 10, 0u);
      last = n;
    }
  });
  for (int b = 0; b < 50; ++b) {
    std::vector<RawRecord> batch;
    for (int i = 0; i < 10; ++i) batch.push_back(commit("r" + std::to_string(b * 10 + i), "2018-01-01"));
    store.append(batch);
  }
  done = true;
  reader.join();
  EXPECT_EQ(store.raw_count(), 500u);
}

TEST(Store, ManifestVersionIsChecked) {
  TempDir dir;
  { Store create(dir / "s"); }
  write_text(dir / "s" / "manifest.json", R"({"format_version": 99})");
  EXPECT_THROW(Store(dir / "s", Store::Mode::read_only), StoreError);
}
