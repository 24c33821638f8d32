// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "flowrt/harness/metrics.hpp"

namespace flowrt {

struct Threshold {
  std::string name;
  double value = 0.0;   // measured ratio
  double limit = 0.0;
  bool at_least = true; // pass iff value >= limit (else value <= limit)
  bool passed() const { return at_least ? value >= limit : value <= limit; }
};

// Ratios are a / b; for latency and memory lower is better for a.
struct ComparisonReport {
  std::string workflow;
  std::string pattern;
  std::string label_a;
  std::string label_b;
  double p50_ratio = 1.0;
  double p99_ratio = 1.0;
  double throughput_ratio = 1.0;
  double gb_seconds_ratio = 1.0;
  double sink_byte_seconds_ratio = 1.0;
  std::vector<Threshold> thresholds;

  bool passed() const;
  void write_table(std::ostream& out, const RunMetrics& a, const RunMetrics& b) const;
  void write_json(std::ostream& out) const;
};

// Throws Error(kMismatchedWorkloads) unless both runs used the same
// workflow, pattern, input size and seed.
ComparisonReport compare(const RunMetrics& a, const RunMetrics& b);

// Default verdicts for data-flow (a) against control-flow (b): throughput
// ratio above 1 and mean latency not worse.
void add_default_thresholds(ComparisonReport& report, const RunMetrics& a, const RunMetrics& b);

}  // namespace flowrt
