// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <vector>

#include "flowrt/common/clock.hpp"

namespace flowrt {

// Discrete-event scheduler. Events at equal timestamps run in scheduling
// order, which makes every run under a fixed seed reproducible.
//
// With `paced` set the loop sleeps until the wall clock catches up with each
// event's timestamp, so the same code drives real-time smoke runs.
class EventLoop final : public Clock {
 public:
  using Task = std::function<void()>;

  explicit EventLoop(bool paced = false) : paced_(paced) {}

  Nanos now() const override { return now_; }

  void schedule_at(Nanos at, Task task);
  void schedule_after(Nanos delay, Task task) { schedule_at(now_ + delay, std::move(task)); }

  // Runs one event; false when the queue is empty.
  bool step();
  // Runs every event with timestamp <= deadline, then sets now to deadline.
  void run_until(Nanos deadline);
  // Runs until the queue is empty or stop() is called.
  void run();
  void stop() { stopped_ = true; }

  bool empty() const { return queue_.empty(); }
  std::optional<Nanos> next_at() const {
    return queue_.empty() ? std::nullopt : std::optional<Nanos>(queue_.top().at);
  }
  std::size_t pending() const { return queue_.size(); }
  std::uint64_t executed() const { return executed_; }

 private:
  struct Event {
    Nanos at;
    std::uint64_t seq;
    Task task;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.at != b.at ? a.at > b.at : a.seq > b.seq;
    }
  };

  void pace(Nanos at);

  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  Nanos now_{0};
  std::uint64_t next_seq_ = 0;
  std::uint64_t executed_ = 0;
  bool paced_;
  bool stopped_ = false;
  bool started_ = false;
  std::int64_t wall_origin_ns_ = 0;
};

}  // namespace flowrt
