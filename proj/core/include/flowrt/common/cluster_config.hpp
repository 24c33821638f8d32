// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flowrt/common/types.hpp"

namespace flowrt {

struct NodeSpec {
  NodeId id;
  double cores = 16.0;
  std::int64_t memory_mb = 65536;
};

enum class ClockMode { kVirtual, kReal };

enum class FaultKind { kTransferInterrupt, kFluFault };

// One injected fault. Matching is by request ordinal and flow endpoints;
// empty strings match anything.
struct FaultSpec {
  FaultKind kind = FaultKind::kTransferInterrupt;
  std::uint64_t request_index = 0;
  FunctionName source;
  DataName data;
  FunctionName destination;
  std::uint64_t chunk_index = 0;
  bool retention_lost = false;
  // FLU faults fire at this fraction of the execution.
  double at_fraction = 0.5;
};

enum class ReleasePolicy { kProactive, kAtRequestCompletion };

// Knobs of the simulated runtime. Defaults follow the documented design
// values (alpha 1.1, EWMA weight 0.3, 500 ms cold start, 15 min keep-alive,
// 30 s sink TTL swept every second).
struct RuntimeConfig {
  double alpha = 1.1;
  double ewma_beta = 0.3;
  bool pressure_aware = true;
  bool autoscale = true;
  int prewarm_per_function = 1;
  int max_containers_per_function = 1000;
  int flu_slots = 1;
  Nanos cold_start = from_millis(500);
  Nanos keepalive = from_seconds(900);
  Nanos keepalive_sweep_interval = from_seconds(10);
  Nanos request_gc_after = from_seconds(60);
  Nanos redo_delay = from_millis(10);
  ReleasePolicy release_policy = ReleasePolicy::kProactive;
  Nanos sink_ttl = from_seconds(30);
  Nanos sink_sweep_interval = from_seconds(1);
  std::size_t checkpoint_every_chunks = 8;
  Nanos checkpoint_every = from_millis(100);
  // Backend-store knobs of the control-flow baseline.
  Nanos trigger_overhead = from_millis(63);
  double store_contention = 1.0;
  std::string spill_root;  // empty: a fresh temporary directory per run
};

struct ClusterConfig {
  std::vector<NodeSpec> nodes;
  ClockMode clock = ClockMode::kVirtual;
  std::vector<FaultSpec> faults;
  RuntimeConfig runtime;

  // Worker-node template: three 16-core / 64 GiB nodes n0..n2.
  static ClusterConfig three_node();
  static ClusterConfig single_node();

  bool has_node(const NodeId& id) const;
  // Throws Error(kConfig) on duplicate/empty node ids or bad resources.
  void validate() const;
};

}  // namespace flowrt
