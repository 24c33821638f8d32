// SPDX-License-Identifier: Apache-2.0
#include "flowrt/common/event_loop.hpp"

#include <chrono>
#include <thread>

namespace flowrt {

namespace {

std::int64_t wall_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

void EventLoop::schedule_at(Nanos at, Task task) {
  if (at < now_) at = now_;
  queue_.push(Event{at, next_seq_++, std::move(task)});
}

void EventLoop::pace(Nanos at) {
  if (!paced_) return;
  if (!started_) {
    started_ = true;
    wall_origin_ns_ = wall_ns() - now_.count();
  }
  auto target = wall_origin_ns_ + at.count();
  auto delta = target - wall_ns();
  if (delta > 0) std::this_thread::sleep_for(std::chrono::nanoseconds(delta));
}

bool EventLoop::step() {
  if (queue_.empty()) return false;
  // Move the task out before popping: the task may schedule new events.
  Event ev = std::move(const_cast<Event&>(queue_.top()));
  queue_.pop();
  pace(ev.at);
  now_ = ev.at;
  ++executed_;
  ev.task();
  return true;
}

void EventLoop::run_until(Nanos deadline) {
  stopped_ = false;
  while (!stopped_ && !queue_.empty() && queue_.top().at <= deadline) step();
  if (!stopped_ && now_ < deadline) {
    pace(deadline);
    now_ = deadline;
  }
}

void EventLoop::run() {
  stopped_ = false;
  while (!stopped_ && step()) {
  }
}

}  // namespace flowrt
