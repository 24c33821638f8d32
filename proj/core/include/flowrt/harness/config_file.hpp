// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "flowrt/common/cluster_config.hpp"
#include "flowrt/harness/metrics.hpp"

namespace flowrt {

// Reads a cluster document:
//
//   {
//     "nodes": [{"id": "n0", "cores": 16, "memory_mb": 65536}, ...],
//     "clock": "virtual" | "real",
//     "runtime": {"alpha": 1.1, "sink_ttl": "30s", "cold_start": "500ms", ...},
//     "faults": [{"kind": "interrupt", "request": 0, "source": "start",
//                 "chunk": 3, "retention_lost": false}, ...]
//   }
//
// Every field except "nodes" is optional. Throws Error(kConfig).
ClusterConfig load_cluster_config(const std::string& path);
ClusterConfig parse_cluster_config(const std::string& json_text);

// Inverse of RunMetrics::write_summary_json for the summary fields (the
// per-request list is not part of the summary).
RunMetrics read_summary_json(const std::string& path);

}  // namespace flowrt
