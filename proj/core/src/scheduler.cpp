#include "qgauge/scheduler.hpp"

#include <stdexcept>

#include <spdlog/spdlog.h>

namespace qgauge {

AssessmentScheduler::AssessmentScheduler(std::chrono::seconds period, Instant start, Task task)
    : period_(period), next_tick_(start + period), task_(std::move(task)) {
  if (period < std::chrono::minutes(1)) {
    throw std::invalid_argument("assessment period must be at least one minute");
  }
  if (!task_) throw std::invalid_argument("assessment task is empty");
  worker_ = std::thread([this] { worker_loop(); });
}

AssessmentScheduler::~AssessmentScheduler() {
  cancel();
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  cv_.notify_all();
  if (clock_.joinable()) clock_.join();
  if (worker_.joinable()) worker_.join();
}

std::size_t AssessmentScheduler::advance_to(Instant now) {
  std::size_t dispatched = 0;
  {
    std::lock_guard lock(mutex_);
    while (!cancelled_ && next_tick_ <= now) {
      const Instant tick = next_tick_;
      next_tick_ += period_;
      if (active_ || pending_) {
        ++skipped_;
        spdlog::warn("assessment tick {} skipped: previous run still active", format_instant(tick));
        continue;
      }
      pending_ = tick;
      ++dispatched;
    }
  }
  cv_.notify_all();
  return dispatched;
}

void AssessmentScheduler::start_realtime() {
  std::lock_guard lock(mutex_);
  if (clock_.joinable() || cancelled_) return;
  clock_ = std::thread([this] {
    std::unique_lock lock(mutex_);
    while (!cancelled_ && !stop_) {
      const auto wake = std::chrono::system_clock::time_point(next_tick_);
      cv_.wait_until(lock, wake, [&] { return cancelled_ || stop_; });
      if (cancelled_ || stop_) break;
      if (std::chrono::system_clock::now() < wake) continue;
      lock.unlock();
      advance_to(now_utc());
      lock.lock();
    }
  });
}

void AssessmentScheduler::wait_idle() {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [&] { return !active_ && !pending_; });
}

void AssessmentScheduler::cancel() {
  {
    std::lock_guard lock(mutex_);
    cancelled_ = true;
  }
  cv_.notify_all();
}

bool AssessmentScheduler::cancelled() const {
  std::lock_guard lock(mutex_);
  return cancelled_;
}

std::size_t AssessmentScheduler::completed() const {
  std::lock_guard lock(mutex_);
  return completed_;
}

std::size_t AssessmentScheduler::skipped() const {
  std::lock_guard lock(mutex_);
  return skipped_;
}

void AssessmentScheduler::worker_loop() {
  std::unique_lock lock(mutex_);
  while (true) {
    cv_.wait(lock, [&] { return stop_ || pending_.has_value(); });
    if (!pending_) break;
    const Instant tick = *pending_;
    pending_.reset();
    active_ = true;
    lock.unlock();
    try {
      task_(tick);
    } catch (const std::exception& e) {
      spdlog::error("scheduled assessment at {} failed: {}", format_instant(tick), e.what());
    }
    lock.lock();
    active_ = false;
    ++completed_;
    cv_.notify_all();
  }
}

}  // namespace qgauge
