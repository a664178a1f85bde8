#include "qgauge/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace qgauge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string errno_text() { return std::strerror(errno); }

bool record_less(const RawRecord& a, const RawRecord& b) {
  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
  return a.record_id < b.record_id;
}

std::string_view file_for(Stratum s) {
  switch (s) {
    case Stratum::metric:
      return Store::kMetricsFile;
    case Stratum::factor:
      return Store::kFactorsFile;
    case Stratum::aspect:
      return Store::kAspectsFile;
  }
  return Store::kMetricsFile;
}

}  // namespace

Store::Store(fs::path directory, Mode mode, std::string project)
    : directory_(std::move(directory)), mode_(mode), project_(std::move(project)) {
  std::error_code ec;
  if (mode_ == Mode::read_write) {
    fs::create_directories(directory_, ec);
    if (ec) throw StoreError("cannot create store directory " + directory_.string() + ": " + ec.message());
    const fs::path lock_path = directory_ / ".lock";
    lock_fd_ = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (lock_fd_ < 0) throw StoreError("cannot open " + lock_path.string() + ": " + errno_text());
    if (::flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(lock_fd_);
      lock_fd_ = -1;
      throw StoreError("store " + directory_.string() + " is locked by another writer");
    }
  } else if (!fs::is_directory(directory_, ec)) {
    throw StoreError("store directory " + directory_.string() + " does not exist");
  }

  const fs::path manifest = directory_ / kManifestFile;
  if (fs::exists(manifest, ec)) {
    std::ifstream in(manifest);
    json m = json::parse(in, nullptr, false);
    if (m.is_discarded() || !m.is_object()) throw StoreError("corrupt manifest " + manifest.string());
    if (m.value("format_version", 0) != kFormatVersion) {
      throw StoreError("unsupported store format version in " + manifest.string());
    }
    project_ = m.value("project", project_);
  } else if (mode_ == Mode::read_write) {
    const json m = {{"format_version", kFormatVersion}, {"project", project_}};
    const fs::path tmp = directory_ / "manifest.json.tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      out << m.dump(2) << '\n';
      if (!out) throw StoreError("cannot write manifest in " + directory_.string());
    }
    fs::rename(tmp, manifest, ec);
    if (ec) throw StoreError("cannot write manifest: " + ec.message());
  }
  load();
}

Store::~Store() {
  if (lock_fd_ >= 0) {
    ::flock(lock_fd_, LOCK_UN);
    ::close(lock_fd_);
  }
}

void Store::require_writable() const {
  if (mode_ != Mode::read_write) throw StoreError("store opened read-only");
}

std::vector<std::string> Store::read_lines(std::string_view file) {
  const fs::path path = directory_ / file;
  std::vector<std::string> lines;
  std::ifstream in(path, std::ios::binary);
  if (!in) return lines;
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::size_t complete = content.rfind('\n') == std::string::npos ? 0 : content.rfind('\n') + 1;
  if (complete < content.size() && mode_ == Mode::read_write) {
    // A torn tail is an unfinished write: drop it so the next append starts clean.
    std::error_code ec;
    fs::resize_file(path, complete, ec);
  }
  std::size_t start = 0;
  while (start < complete) {
    const std::size_t end = content.find('\n', start);
    if (end > start) lines.emplace_back(content, start, end - start);
    start = end + 1;
  }
  return lines;
}

void Store::append_lines(std::string_view file, const std::string& bytes) {
  if (bytes.empty()) return;
  const fs::path path = directory_ / file;
  const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) throw StoreError("cannot open " + path.string() + ": " + errno_text());
  std::size_t written = 0;
  while (written < bytes.size()) {
    const ssize_t n = ::write(fd, bytes.data() + written, bytes.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const std::string err = errno_text();
      ::close(fd);
      throw StoreError("write to " + path.string() + " failed: " + err);
    }
    written += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
}

void Store::load() {
  load_raw();
  load_snapshots();
  load_alerts();
}

void Store::load_raw() {
  std::size_t line_no = 0;
  for (const auto& line : read_lines(kRawFile)) {
    ++line_no;
    RawRecord r;
    try {
      r = record_from_json(json::parse(line));
    } catch (const std::exception& e) {
      throw StoreError(std::string(kRawFile) + " line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!record_ids_.insert(r.record_id).second) continue;
    raw_by_kind_[static_cast<std::size_t>(r.kind())].push_back(std::move(r));
  }
  for (auto& v : raw_by_kind_) std::sort(v.begin(), v.end(), record_less);
}

void Store::load_snapshots() {
  struct Partial {
    std::uint64_t seq = 0;
    std::size_t expected = 0;
    Snapshot snapshot;
  };
  std::map<std::string, Partial> partial;
  for (auto file : {kMetricsFile, kFactorsFile, kAspectsFile}) {
    std::size_t line_no = 0;
    for (const auto& line : read_lines(file)) {
      ++line_no;
      try {
        const json j = json::parse(line);
        const std::string id = j.at("snapshot_id").get<std::string>();
        auto [it, fresh] = partial.try_emplace(id);
        Partial& p = it->second;
        if (fresh) {
          p.seq = j.at("seq").get<std::uint64_t>();
          p.expected = j.at("snapshot_size").get<std::size_t>();
          p.snapshot.snapshot_id = id;
          p.snapshot.evaluated_at = *parse_instant(j.at("evaluated_at").get<std::string>());
          p.snapshot.window = {*parse_instant(j.at("window").at("from").get<std::string>()),
                               *parse_instant(j.at("window").at("to").get<std::string>())};
        }
        p.snapshot.entries.insert_or_assign(j.at("element_id").get<std::string>(),
                                            entry_from_json(j.at("entry")));
      } catch (const std::exception& e) {
        throw StoreError(std::string(file) + " line " + std::to_string(line_no) + ": " + e.what());
      }
    }
  }
  for (auto& [id, p] : partial) {
    next_seq_ = std::max(next_seq_, p.seq + 1);
    // Snapshots cut short by a crash stay invisible.
    if (p.snapshot.entries.size() != p.expected) continue;
    snapshots_.push_back({p.seq, std::move(p.snapshot)});
  }
  std::sort(snapshots_.begin(), snapshots_.end(),
            [](const StoredSnapshot& a, const StoredSnapshot& b) { return a.seq < b.seq; });
}

void Store::load_alerts() {
  std::size_t line_no = 0;
  for (const auto& line : read_lines(kAlertsFile)) {
    ++line_no;
    try {
      const json j = json::parse(line);
      if (auto ack = j.find("ack"); ack != j.end()) {
        if (auto it = alert_index_.find(ack->get<std::string>()); it != alert_index_.end()) {
          alerts_[it->second].acknowledged = true;
        }
        continue;
      }
      Alert a = alert_from_json(j);
      if (alert_index_.count(a.alert_id)) continue;
      alert_index_.emplace(a.alert_id, alerts_.size());
      alerts_.push_back(std::move(a));
    } catch (const std::exception& e) {
      throw StoreError(std::string(kAlertsFile) + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

AppendResult Store::append(std::span<const RawRecord> records) {
  require_writable();
  for (const auto& r : records) {
    const auto problems = record_problems(r);
    if (!problems.empty()) throw RecordError("record " + r.record_id + ": " + problems.front());
  }
  std::lock_guard writer(writer_mutex_);
  AppendResult result;
  std::vector<const RawRecord*> fresh;
  std::unordered_set<std::string> batch_ids;
  {
    std::shared_lock read(data_mutex_);
    for (const auto& r : records) {
      if (record_ids_.count(r.record_id) || !batch_ids.insert(r.record_id).second) {
        ++result.duplicates;
      } else {
        fresh.push_back(&r);
      }
    }
  }
  std::string bytes;
  for (const RawRecord* r : fresh) {
    bytes += record_to_json(*r).dump();
    bytes += '\n';
  }
  append_lines(kRawFile, bytes);

  std::unique_lock write(data_mutex_);
  for (const RawRecord* r : fresh) {
    record_ids_.insert(r->record_id);
    auto& bucket = raw_by_kind_[static_cast<std::size_t>(r->kind())];
    bucket.insert(std::upper_bound(bucket.begin(), bucket.end(), *r, record_less), *r);
  }
  result.inserted = fresh.size();
  return result;
}

std::vector<RawRecord> Store::query_raw(SourceKind kind, TimeWindow window) const {
  std::shared_lock read(data_mutex_);
  const auto& bucket = raw_by_kind_[static_cast<std::size_t>(kind)];
  auto lo = std::partition_point(bucket.begin(), bucket.end(),
                                 [&](const RawRecord& r) { return r.timestamp < window.from; });
  auto hi = std::partition_point(lo, bucket.end(),
                                 [&](const RawRecord& r) { return r.timestamp < window.to; });
  return {lo, hi};
}

std::size_t Store::raw_count() const {
  std::shared_lock read(data_mutex_);
  return record_ids_.size();
}

std::string Store::save_snapshot(const Snapshot& snapshot) {
  require_writable();
  std::lock_guard writer(writer_mutex_);
  Snapshot s = snapshot;
  s.transient = false;
  const std::uint64_t seq = next_seq_;
  if (s.snapshot_id.empty()) {
    s.snapshot_id = "snap-" + derive_record_id({format_instant(s.evaluated_at),
                                                format_instant(s.window.from),
                                                format_instant(s.window.to), std::to_string(seq)});
  }
  {
    std::shared_lock read(data_mutex_);
    for (const auto& stored : snapshots_) {
      if (stored.snapshot.snapshot_id == s.snapshot_id) {
        throw StoreError("snapshot id " + s.snapshot_id + " already stored");
      }
    }
  }

  const json header_window = {{"from", format_instant(s.window.from)},
                              {"to", format_instant(s.window.to)}};
  std::map<Stratum, std::string> per_file;
  for (const auto& [id, entry] : s.entries) {
    const json line = {{"seq", seq},
                       {"snapshot_id", s.snapshot_id},
                       {"evaluated_at", format_instant(s.evaluated_at)},
                       {"window", header_window},
                       {"snapshot_size", s.entries.size()},
                       {"element_id", id},
                       {"entry", entry_to_json(entry)}};
    per_file[entry.stratum] += line.dump() + '\n';
  }
  // Metrics first, aspects last; a reader reopening after a crash ignores the
  // snapshot unless every line made it.
  for (Stratum st : {Stratum::metric, Stratum::factor, Stratum::aspect}) {
    if (auto it = per_file.find(st); it != per_file.end()) append_lines(file_for(st), it->second);
  }

  std::unique_lock write(data_mutex_);
  next_seq_ = seq + 1;
  snapshots_.push_back({seq, s});
  return s.snapshot_id;
}

std::vector<Snapshot> Store::query_snapshots(TimeWindow window) const {
  std::shared_lock read(data_mutex_);
  std::vector<Snapshot> out;
  for (const auto& stored : snapshots_) {
    if (window.contains(stored.snapshot.evaluated_at)) out.push_back(stored.snapshot);
  }
  std::stable_sort(out.begin(), out.end(), [](const Snapshot& a, const Snapshot& b) {
    return a.evaluated_at < b.evaluated_at;
  });
  return out;
}

std::optional<Snapshot> Store::latest_snapshot() const {
  std::shared_lock read(data_mutex_);
  if (snapshots_.empty()) return std::nullopt;
  return snapshots_.back().snapshot;
}

std::optional<Snapshot> Store::find_snapshot(std::string_view snapshot_id) const {
  std::shared_lock read(data_mutex_);
  for (const auto& stored : snapshots_) {
    if (stored.snapshot.snapshot_id == snapshot_id) return stored.snapshot;
  }
  return std::nullopt;
}

std::vector<SeriesPoint> Store::element_series(std::string_view element_id, TimeWindow window) const {
  std::vector<SeriesPoint> out;
  for (const auto& s : query_snapshots(window)) {
    if (const auto* e = s.find(std::string(element_id))) {
      out.push_back({s.evaluated_at, s.snapshot_id, e->value, e->color});
    }
  }
  return out;
}

std::size_t Store::snapshot_count() const {
  std::shared_lock read(data_mutex_);
  return snapshots_.size();
}

std::size_t Store::append_alerts(std::span<const Alert> alerts) {
  require_writable();
  std::lock_guard writer(writer_mutex_);
  std::vector<const Alert*> fresh;
  std::unordered_set<std::string> batch;
  {
    std::shared_lock read(data_mutex_);
    for (const auto& a : alerts) {
      if (!alert_index_.count(a.alert_id) && batch.insert(a.alert_id).second) fresh.push_back(&a);
    }
  }
  std::string bytes;
  for (const Alert* a : fresh) bytes += alert_to_json(*a).dump() + '\n';
  append_lines(kAlertsFile, bytes);

  std::unique_lock write(data_mutex_);
  for (const Alert* a : fresh) {
    alert_index_.emplace(a->alert_id, alerts_.size());
    alerts_.push_back(*a);
  }
  return fresh.size();
}

std::vector<Alert> Store::query_alerts(std::optional<Instant> since) const {
  std::shared_lock read(data_mutex_);
  std::vector<Alert> out;
  for (const auto& a : alerts_) {
    if (!since || a.evaluated_at >= *since) out.push_back(a);
  }
  return out;
}

bool Store::acknowledge_alert(std::string_view alert_id) {
  require_writable();
  std::lock_guard writer(writer_mutex_);
  {
    std::shared_lock read(data_mutex_);
    auto it = alert_index_.find(std::string(alert_id));
    if (it == alert_index_.end()) return false;
    if (alerts_[it->second].acknowledged) return true;
  }
  const json line = {{"ack", alert_id}, {"at", format_instant(now_utc())}};
  append_lines(kAlertsFile, line.dump() + '\n');
  std::unique_lock write(data_mutex_);
  alerts_[alert_index_.at(std::string(alert_id))].acknowledged = true;
  return true;
}

}  // namespace qgauge
