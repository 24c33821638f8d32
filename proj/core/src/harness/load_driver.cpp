// SPDX-License-Identifier: Apache-2.0
#include "flowrt/harness/load_driver.hpp"

#include <algorithm>
#include <cmath>

#include "flowrt/harness/oracle.hpp"
#include "flowrt/workflow/transforms.hpp"

namespace flowrt {

LoadDriver::LoadDriver(EventLoop& loop, const WorkloadSpec& spec, Submit submit)
    : loop_(loop), spec_(spec), submit_(std::move(submit)), rng_(spec.seed) {}

void LoadDriver::submit_next() { submit_(next_index_++); }

void LoadDriver::schedule_rate(double rpm, Nanos from, Nanos until) {
  const double gap_s = 60.0 / rpm;
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (std::uint64_t i = 0;; ++i) {
    double offset = static_cast<double>(i) * gap_s;
    if (spec_.pattern.jitter > 0) offset += u(rng_) * spec_.pattern.jitter * gap_s;
    Nanos at = from + from_seconds(std::max(0.0, offset));
    if (at >= until) break;
    loop_.schedule_at(at, [this] { submit_next(); });
  }
}

void LoadDriver::start() {
  const auto& p = spec_.pattern;
  Nanos now = loop_.now();
  switch (p.kind) {
    case LoadPattern::Kind::kOpenLoop:
      schedule_rate(p.rpm, now, now + p.duration);
      break;
    case LoadPattern::Kind::kBurst:
      schedule_rate(p.low_rpm, now, now + p.switch_at);
      schedule_rate(p.high_rpm, now + p.switch_at, now + p.switch_at + p.switch_at);
      break;
    case LoadPattern::Kind::kClosedLoop:
      for (std::size_t c = 0; c < p.clients; ++c) loop_.schedule_at(now, [this] { submit_next(); });
      break;
  }
}

void LoadDriver::finished(std::uint64_t) {
  if (spec_.pattern.kind != LoadPattern::Kind::kClosedLoop) return;
  if (loop_.now() >= spec_.pattern.duration) return;
  submit_next();
}

Nanos drive_run(EventLoop& loop, const WorkloadSpec& spec,
                const std::function<std::size_t()>& outstanding) {
  Nanos window = spec.pattern.total_duration();
  if (spec.pattern.kind == LoadPattern::Kind::kClosedLoop) {
    loop.run_until(window);
    return window;
  }
  loop.run_until(window);
  Nanos deadline = window + spec.drain_timeout;
  while (outstanding() > 0) {
    auto next = loop.next_at();
    if (!next || *next > deadline) {
      loop.run_until(deadline);
      break;
    }
    loop.step();
  }
  return loop.now();
}

std::size_t finalize_requests(RunMetrics& m, std::vector<RequestRecord> records,
                              const WorkloadSpec& spec, Nanos stopped, bool verify) {
  std::size_t mismatches = 0;
  m.workflow = spec.workflow.name;
  m.pattern = spec.pattern.to_string();
  m.seed = spec.seed;
  m.input_size = spec.input_size;
  m.duration_s = to_seconds(spec.pattern.total_duration());
  m.finished_at_s = to_seconds(stopped);
  bool closed = spec.pattern.kind == LoadPattern::Kind::kClosedLoop;
  m.requests.clear();
  for (auto& r : records) {
    if (r.end && !r.failed && *r.end - r.submit > spec.drain_timeout) r.end.reset();
    if (closed && !r.end && stopped - r.submit <= spec.drain_timeout) continue;
    if (verify && r.completed()) {
      Payload input(generate_input(spec.seed, r.index, spec.input_size));
      if (golden_run(spec.workflow, input).terminal_outputs != r.outputs) ++mismatches;
    }
    if (!spec.keep_outputs) r.outputs.clear();
    m.requests.push_back(std::move(r));
  }
  m.summarize();
  return mismatches;
}

}  // namespace flowrt
