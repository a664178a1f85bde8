#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>

#include "qgauge/time.hpp"

namespace qgauge {

/// Periodic assessment trigger. Ticks fall at start + k * period (k >= 1)
/// and run the task on a worker thread; a tick that arrives while the
/// previous run is still active is skipped with a warning.
///
/// The clock is driven either by the caller through advance_to (replays,
/// tests) or by start_realtime.
class AssessmentScheduler {
 public:
  using Task = std::function<void(Instant tick)>;

  /// Throws std::invalid_argument when `period` is shorter than a minute.
  AssessmentScheduler(std::chrono::seconds period, Instant start, Task task);
  ~AssessmentScheduler();

  AssessmentScheduler(const AssessmentScheduler&) = delete;
  AssessmentScheduler& operator=(const AssessmentScheduler&) = delete;

  /// Fires every tick up to and including `now`. Returns how many ticks were
  /// dispatched (skipped ticks excluded).
  std::size_t advance_to(Instant now);

  /// Ticks from the system clock on a background thread until cancel().
  void start_realtime();

  /// Blocks until no run is active.
  void wait_idle();

  /// No further ticks fire; an active run finishes normally.
  void cancel();
  bool cancelled() const;

  std::size_t completed() const;
  std::size_t skipped() const;
  std::chrono::seconds period() const { return period_; }

 private:
  void worker_loop();

  std::chrono::seconds period_;
  Instant next_tick_;
  Task task_;

  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::optional<Instant> pending_;
  bool active_ = false;
  bool stop_ = false;
  bool cancelled_ = false;
  std::size_t completed_ = 0;
  std::size_t skipped_ = 0;

  std::thread worker_;
  std::thread clock_;
};

}  // namespace qgauge
