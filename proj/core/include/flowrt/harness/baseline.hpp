// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "flowrt/harness/cluster.hpp"

namespace flowrt {

// Runs the workload under control-flow orchestration: a central controller
// triggers each function once all of its predecessors completed, one
// trigger at a time per request, and every intermediate payload travels
// through a backend store (Put by the producer, Get by the consumer), both
// charged to the container's own bandwidth. Within a container, Get, compute
// and Put are serialized.
//
// Injected faults are ignored; the baseline has no recovery path to compare.
// sink_byte_seconds reports the backend store's resident bytes over time.
RunResult run_controlflow(const ClusterConfig& config, const WorkloadSpec& workload,
                          const Placement& placement, const RunOptions& options = {});

}  // namespace flowrt
