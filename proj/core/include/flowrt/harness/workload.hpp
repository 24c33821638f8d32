// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "flowrt/common/types.hpp"
#include "flowrt/workflow/workflow.hpp"

namespace flowrt {

struct LoadPattern {
  enum class Kind { kOpenLoop, kClosedLoop, kBurst };
  Kind kind = Kind::kOpenLoop;
  double rpm = 10.0;          // open loop
  std::size_t clients = 1;    // closed loop
  Nanos duration = from_seconds(60);
  double low_rpm = 10.0;      // burst: low_rpm until switch_at, then high_rpm
  double high_rpm = 100.0;
  Nanos switch_at = from_seconds(60);
  double jitter = 0.0;        // open loop: fraction of the inter-arrival gap

  // open:<rpm>:<dur> | closed:<clients>:<dur> | burst:<lo>:<hi>:<t>
  // Burst runs for 2t.
  static LoadPattern parse(const std::string& text);
  std::string to_string() const;
  Nanos total_duration() const;

  static LoadPattern open(double rpm, Nanos duration);
  static LoadPattern closed(std::size_t clients, Nanos duration);
  static LoadPattern burst(double low_rpm, double high_rpm, Nanos switch_at);
};

struct WorkloadSpec {
  WorkflowDefinition workflow;
  LoadPattern pattern;
  std::uint64_t input_size = 4 * 1024 * 1024;
  std::uint64_t seed = 1;
  // Requests still running this long after the pattern ends count as
  // timeouts.
  Nanos drain_timeout = from_seconds(60);
  // Keep terminal outputs in the metrics (tests and verification).
  bool keep_outputs = false;
};

RequestId request_id_for(std::uint64_t seed, std::uint64_t index);

}  // namespace flowrt
