// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "flowrt/common/cluster_config.hpp"
#include "flowrt/common/event_loop.hpp"
#include "flowrt/engine/event_log.hpp"
#include "flowrt/runtime/container.hpp"
#include "flowrt/sink/data_sink.hpp"
#include "flowrt/wire/dataplane.hpp"
#include "flowrt/workflow/projection.hpp"

namespace flowrt {

enum class InvocationStatus { kWaiting, kReady, kDispatched, kDone, kFailed };

const char* to_string(InvocationStatus s) noexcept;

enum class ScaleReason { kPressure, kNoIdleFlu };

const char* to_string(ScaleReason r) noexcept;

struct ScaleDecision {
  FunctionName function;
  ScaleReason reason = ScaleReason::kNoIdleFlu;
  std::optional<BlockSignal> signal;
  std::size_t queue_depth = 0;
  ContainerId container = 0;
  Nanos at{0};
};

struct FaultReport {
  enum class Kind { kTransfer, kFlu };
  Kind kind = Kind::kTransfer;
  RequestId request;
  FunctionName function;  // source of the flow, or the faulted function
  DataName data;
  FunctionName destination;
  ConnectorPtr connector;
  ContainerId container = 0;
};

struct RedoPlan {
  RequestId request;
  FunctionName failed_function;
  ContainerId container = 0;  // holder of the failed flow or execution
  std::vector<std::pair<ConnectorPtr, Checkpoint>> frontier;
  std::vector<FunctionName> reexecute;  // topological order
  // Flows the re-execution must regenerate; empty means all outputs.
  std::set<std::uint64_t> regenerate;
  // Outputs already emitted before an execution fault.
  std::set<DataName> suppress;
  // Destination was unreachable; retry the transfer as is.
  bool retry = false;

  bool empty() const { return frontier.empty() && reexecute.empty() && !retry; }
};

struct EngineCounters {
  std::uint64_t dispatches = 0;
  std::uint64_t duplicate_ready = 0;
  std::uint64_t cold_starts = 0;
  std::uint64_t scale_pressure = 0;
  std::uint64_t scale_no_idle = 0;
  std::uint64_t block_signals = 0;
  std::uint64_t ignored_signals = 0;
  std::uint64_t recycled = 0;
  std::uint64_t redos = 0;
  std::uint64_t failures = 0;
};

// Memory occupancy of one container, for the N x t metric.
struct ContainerLifetime {
  ContainerId id = 0;
  FunctionName function;
  NodeId node;
  std::int64_t memory_mb = 0;
  Nanos created_at{0};
  std::optional<Nanos> recycled_at;
};

// Hands out container ids unique across a cluster.
struct IdSource {
  std::uint64_t next = 1;
  std::uint64_t allocate() { return next++; }
};

struct EngineHooks {
  std::function<void(const RequestId&, const FunctionName&, const Payload&)> on_terminal;
  std::function<void(const RequestId&, const std::string&)> on_request_failed;
  std::function<void(const RequestId&, const FunctionName&, Nanos)> on_dispatch;
  // Fraction at which the first execution of (request, function) faults.
  std::function<std::optional<double>(const RequestId&, const FunctionName&)> flu_fault;
};

// Per-node scheduler. All engine logic runs on the event loop; sink
// readiness notifications are re-queued onto it rather than handled inline.
class NodeEngine {
 public:
  NodeEngine(NodeSpec node, const WorkflowDefinition& def, const Placement& placement,
             LocalDataFlowGraph graph, EventLoop& loop, DataPlane& dataplane, DataSink& sink,
             const RuntimeConfig& config, EventLog& log, IdSource& ids, EngineHooks hooks = {});
  ~NodeEngine();

  NodeEngine(const NodeEngine&) = delete;
  NodeEngine& operator=(const NodeEngine&) = delete;

  // Prewarms containers and starts the periodic sweeps.
  void start();
  // Stops periodic timers so the event queue can drain.
  void stop();

  void on_data_ready(const RequestId& request, const FunctionName& fn);
  std::optional<ScaleDecision> handle_block_signal(const BlockSignal& signal);
  std::vector<ContainerId> keepalive_sweep(Nanos now);
  RedoPlan plan_redo(const RequestId& request, const FaultReport& failure);
  void execute_redo(const RedoPlan& plan);
  std::size_t dispatch_pending(Nanos now);
  std::size_t dispatch_pending(const FunctionName& fn);
  void on_request_complete(const RequestId& request);

  // Creates a warm container immediately (prewarm, tests).
  Container& add_container(const FunctionName& fn);

  const NodeId& node() const { return node_.id; }
  const LocalDataFlowGraph& graph() const { return graph_; }
  InvocationStatus status(const RequestId& request, const FunctionName& fn) const;
  std::size_t pending(const FunctionName& fn) const;
  std::size_t live_containers(const FunctionName& fn) const;
  std::vector<Container*> containers(const FunctionName& fn) const;
  Container* container(ContainerId id) const;
  const std::vector<ScaleDecision>& scale_decisions() const { return decisions_; }
  const std::vector<ContainerLifetime>& lifetimes() const { return lifetimes_; }
  const EngineCounters& counters() const { return counters_; }

 private:
  struct Invocation {
    RequestId request;
    FunctionName function;
    std::optional<InputBundle> inputs;  // set for re-executions
    InvokeOptions options;
  };
  struct FunctionState {
    InvocationStatus status = InvocationStatus::kWaiting;
    std::uint32_t attempts = 0;
    ContainerId container = 0;
  };
  struct Slot {
    std::unique_ptr<Container> container;
    bool warm = false;
  };

  Container& create_container(const FunctionName& fn, bool warm);
  Container* pick_idle(const FunctionName& fn);
  void dispatch(Container& c, Invocation inv);
  std::optional<ScaleDecision> maybe_scale(const FunctionName& fn,
                                           const std::optional<BlockSignal>& signal);
  bool fits_on_node(const FunctionSpec& spec) const;
  void on_complete(Container& c, const FluCompletion& done);
  void on_transfer_fault(Container& c, const TransferFault& fault);
  void fail_request(const RequestId& request, const std::string& reason);
  void schedule_sweeps();
  void log(const std::string& kind, const RequestId* request, const FunctionName& fn,
           ContainerId container, std::string detail);
  std::shared_ptr<FluStats> stats_for(const FunctionName& fn);

  NodeSpec node_;
  const WorkflowDefinition& def_;
  const Placement& placement_;
  LocalDataFlowGraph graph_;
  EventLoop& loop_;
  DataPlane& dataplane_;
  DataSink& sink_;
  const RuntimeConfig& config_;
  EventLog& log_;
  IdSource& ids_;
  EngineHooks hooks_;

  std::shared_ptr<bool> alive_;
  bool running_ = false;
  std::map<FunctionName, std::vector<Slot>> pool_;
  std::map<FunctionName, std::deque<Invocation>> pending_;
  std::map<FunctionName, Nanos> block_window_;
  std::map<FunctionName, BlockSignal> last_signal_;
  std::set<FunctionName> cold_start_in_flight_;
  std::map<FunctionName, std::shared_ptr<FluStats>> stats_;
  std::map<RequestId, std::map<FunctionName, FunctionState>> table_;
  std::map<std::pair<RequestId, FunctionName>, InputBundle> lineage_;
  std::vector<ScaleDecision> decisions_;
  std::vector<ContainerLifetime> lifetimes_;
  EngineCounters counters_;
};

}  // namespace flowrt
