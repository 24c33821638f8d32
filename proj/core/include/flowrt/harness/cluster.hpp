// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <vector>

#include "flowrt/common/cluster_config.hpp"
#include "flowrt/common/event_loop.hpp"
#include "flowrt/engine/event_log.hpp"
#include "flowrt/engine/node_engine.hpp"
#include "flowrt/harness/metrics.hpp"
#include "flowrt/harness/workload.hpp"
#include "flowrt/sink/data_sink.hpp"
#include "flowrt/wire/dataplane.hpp"

namespace flowrt {

// Everything a run produced besides the summary metrics.
struct RunResult {
  RunMetrics metrics;
  std::vector<EngineEvent> events;
  DataPlaneCounters dataplane;
  SinkStats sinks;          // summed over nodes
  EngineCounters engines;   // summed over nodes
  std::vector<ContainerLifetime> lifetimes;
  std::vector<ScaleDecision> decisions;
  // Completed requests whose terminal outputs differ from the oracle, when
  // verification was requested.
  std::size_t output_mismatches = 0;
};

struct RunOptions {
  bool event_log = true;
  // Check every completed request against the golden oracle.
  bool verify_outputs = false;
};

// A virtual cluster running one workflow: a sink and an engine per node,
// one data plane, one event loop. Not copyable or movable; engines hold
// references into it.
class DataflowCluster {
 public:
  using FinishListener = std::function<void(const RequestRecord&)>;

  DataflowCluster(ClusterConfig config, WorkflowDefinition def, Placement placement,
                  bool event_log = true);
  ~DataflowCluster();

  DataflowCluster(const DataflowCluster&) = delete;
  DataflowCluster& operator=(const DataflowCluster&) = delete;

  void start();
  void stop();

  // Hands the request input to the entry's sink. `index` is the ordinal
  // fault plans refer to.
  void submit(std::uint64_t index, const RequestId& id, const Payload& input);
  void on_finish(FinishListener listener) { finish_ = std::move(listener); }

  EventLoop& loop() { return loop_; }
  DataPlane& dataplane() { return *dataplane_; }
  EventLog& log() { return log_; }
  NodeEngine& engine(const NodeId& node);
  DataSink& sink(const NodeId& node);
  const ClusterConfig& config() const { return config_; }
  const WorkflowDefinition& workflow() const { return def_; }
  const Placement& placement() const { return placement_; }

  std::size_t outstanding() const { return outstanding_; }
  const std::map<RequestId, RequestRecord>& records() const { return records_; }
  std::vector<RequestRecord> records_in_order() const;

  // Totals over nodes.
  SinkStats sink_stats() const;
  EngineCounters engine_counters() const;
  std::vector<ContainerLifetime> lifetimes() const;
  std::vector<ScaleDecision> decisions() const;

 private:
  void on_terminal(const RequestId& r, const FunctionName& fn, const Payload& out);
  void on_failed(const RequestId& r, const std::string& reason);
  void finish(RequestRecord& rec);
  bool interrupt(ConnectorHandle& h, const FlowChunk& chunk);
  std::optional<double> flu_fault(const RequestId& r, const FunctionName& fn);

  ClusterConfig config_;
  WorkflowDefinition def_;
  Placement placement_;
  EventLoop loop_;
  EventLog log_;
  IdSource ids_;
  std::filesystem::path spill_root_;
  bool owns_spill_root_ = false;
  std::unique_ptr<DataPlane> dataplane_;
  std::map<NodeId, std::unique_ptr<DataSink>> sinks_;
  std::map<NodeId, std::unique_ptr<NodeEngine>> engines_;
  std::map<FlowId, LocalEdge> edges_;

  std::map<RequestId, RequestRecord> records_;
  std::map<std::uint64_t, RequestId> by_index_;
  std::set<std::size_t> fired_faults_;
  std::size_t outstanding_ = 0;
  FinishListener finish_;
};

// Runs the workload on a fresh cluster through the data-flow engines.
RunResult run_dataflow(const ClusterConfig& config, const WorkloadSpec& workload,
                       const Placement& placement, const RunOptions& options = {});

// Highest number of containers alive at once.
std::uint64_t peak_containers(const std::vector<ContainerLifetime>& lifetimes, Nanos end);

// Fresh directory under the system temp dir.
std::filesystem::path make_temp_dir(const std::string& prefix);

}  // namespace flowrt
