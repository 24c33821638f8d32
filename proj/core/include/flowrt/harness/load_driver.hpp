// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <random>

#include "flowrt/common/event_loop.hpp"
#include "flowrt/harness/metrics.hpp"
#include "flowrt/harness/workload.hpp"

namespace flowrt {

// Schedules request arrivals for one load pattern on an event loop. The
// submit callback receives the request ordinal; closed-loop clients resubmit
// through finished().
class LoadDriver {
 public:
  using Submit = std::function<void(std::uint64_t index)>;

  LoadDriver(EventLoop& loop, const WorkloadSpec& spec, Submit submit);

  void start();
  // Reports that request `index` finished (completed or failed).
  void finished(std::uint64_t index);

  std::uint64_t submitted() const { return next_index_; }

 private:
  void submit_next();
  void schedule_rate(double rpm, Nanos from, Nanos until);

  EventLoop& loop_;
  const WorkloadSpec& spec_;
  Submit submit_;
  std::mt19937_64 rng_;
  std::uint64_t next_index_ = 0;
};

// Drives the loop through the load window, then drains until `outstanding`
// reaches zero or the drain deadline passes. Closed-loop runs stop at the
// end of the window. Returns the time the run stopped.
Nanos drive_run(EventLoop& loop, const WorkloadSpec& spec,
                const std::function<std::size_t()>& outstanding);

// Turns raw request records into the summary: applies the drain deadline,
// drops closed-loop requests still in flight at the end of the window,
// optionally checks outputs against the oracle (returning the number of
// mismatches) and fills the latency statistics.
std::size_t finalize_requests(RunMetrics& metrics, std::vector<RequestRecord> records,
                              const WorkloadSpec& spec, Nanos stopped, bool verify);

}  // namespace flowrt
