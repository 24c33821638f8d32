// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "flowrt/common/bytes.hpp"
#include "flowrt/common/types.hpp"
#include "flowrt/engine/node_engine.hpp"

namespace flowrt {

struct RequestRecord {
  std::uint64_t index = 0;
  RequestId id;
  Nanos submit{0};
  std::optional<Nanos> start;  // first dispatch of the entry
  std::optional<Nanos> end;    // last terminal finished
  bool failed = false;
  std::string failure;
  std::map<FunctionName, Payload> outputs;  // kept on request

  bool completed() const { return end.has_value() && !failed; }
  double latency_ms() const { return end ? to_millis(*end - submit) : 0.0; }
};

struct RunMetrics {
  std::string mode;  // "dataflow" or "controlflow"
  std::string workflow;
  std::string pattern;
  std::uint64_t seed = 0;
  std::uint64_t input_size = 0;
  double duration_s = 0.0;  // load window
  double finished_at_s = 0.0;

  std::vector<RequestRecord> requests;
  std::size_t submitted = 0;
  std::size_t completed = 0;
  std::size_t timeouts = 0;
  std::size_t failed = 0;

  double mean_ms = 0.0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  double p99_ms = 0.0;
  double throughput_rpm = 0.0;

  double container_gb_seconds = 0.0;
  double sink_byte_seconds = 0.0;
  std::uint64_t cold_starts = 0;
  std::uint64_t scale_decisions = 0;
  std::uint64_t pressure_scale_decisions = 0;
  std::uint64_t spills = 0;
  std::uint64_t redos = 0;
  std::uint64_t duplicate_deliveries = 0;
  std::uint64_t small_transfers = 0;
  std::uint64_t local_connectors = 0;
  std::uint64_t remote_connectors = 0;
  std::uint64_t peak_containers = 0;

  // Fills latency statistics and throughput from `requests`.
  void summarize();
  void write_csv(std::ostream& out) const;
  void write_summary_json(std::ostream& out) const;
};

// Nearest-rank percentile of a sorted list; p in (0, 100].
double nearest_rank(const std::vector<double>& sorted, double p);

// Sum of memory_mb x occupied seconds over every container, in GB * s.
double gb_seconds(const std::vector<ContainerLifetime>& lifetimes, Nanos end);

}  // namespace flowrt
