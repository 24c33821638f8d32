// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "flowrt/common/cluster_config.hpp"
#include "flowrt/common/event_loop.hpp"
#include "flowrt/runtime/pressure.hpp"
#include "flowrt/wire/dataplane.hpp"
#include "flowrt/wire/token_bucket.hpp"
#include "flowrt/workflow/placement.hpp"
#include "flowrt/workflow/transforms.hpp"

namespace flowrt {

using ContainerId = std::uint64_t;

enum class SlotStatus { kIdle, kRunning, kBlocked };

const char* to_string(SlotStatus s) noexcept;

struct FluSlot {
  bool running = false;
  Nanos blocked_until{0};
  std::optional<RequestId> request;
  Nanos started_at{0};

  // A slot can be running and inside a blocking window at once; running wins.
  SlotStatus status(Nanos now) const {
    if (running) return SlotStatus::kRunning;
    if (now < blocked_until) return SlotStatus::kBlocked;
    return SlotStatus::kIdle;
  }
};

struct EmissionTarget {
  FunctionName function;
  NodeId node;
  Payload payload;  // bytes for this destination after routing
  FlowId flow;
  ConnectorPtr connector;
};

struct OutboundEmission {
  RequestId request;
  DataName data;
  Payload payload;
  std::vector<EmissionTarget> targets;  // edge order
  Nanos emitted_at{0};
  std::size_t next_target = 0;

  bool done() const { return next_target >= targets.size(); }
};

// Plain state of one container; the invariants below are checked on it
// directly, independent of any scheduler.
struct ContainerState {
  ContainerId id = 0;
  FunctionName function;
  NodeId node;
  ResourceSpec resources;
  std::vector<FluSlot> slots;
  std::deque<OutboundEmission> dlu_queue;
  std::vector<ConnectorPtr> open_flows;
  Nanos created_at{0};
  Nanos last_active{0};
  Nanos keepalive_deadline{0};
  bool recycled = false;

  std::optional<std::size_t> idle_slot(Nanos now) const;
  bool all_slots_idle(Nanos now) const;
  bool has_unacked_flow() const;
  // Drops handles whose END has been acked.
  void prune_flows();
};

// True iff every slot is idle, the DLU queue is drained, every flow has its
// END acked and the keep-alive deadline has passed.
bool is_recyclable(const ContainerState& c, Nanos now);

struct BlockSignal {
  FunctionName function;
  ContainerId container = 0;
  std::size_t slot = 0;
  double pressure = 0.0;  // seconds
  Nanos at{0};
};

struct FluCompletion {
  RequestId request;
  ContainerId container = 0;
  std::size_t slot = 0;
  Nanos started_at{0};
  Nanos emit_at{0};
  Nanos completes_at{0};
  Payload output;
  bool faulted = false;
  bool emitted = false;  // outputs went out before a fault
};

struct TransferFault {
  RequestId request;
  DataName data;
  FunctionName destination;
  ConnectorPtr connector;
};

struct ContainerEvent {
  Nanos at{0};
  ContainerId container = 0;
  std::string event;
  std::string detail;
};

struct InvokeOptions {
  // Data names whose emission already happened in an earlier attempt.
  std::set<DataName> suppress;
  // When set, only these flows are emitted (regeneration of lost flows).
  std::optional<std::set<std::uint64_t>> only_flows;
  // Fail the execution at this fraction of its duration.
  std::optional<double> fault_at;
};

// Simulated container: FLU slots executing the function's transform on
// virtual time, and a DLU that drains emissions through connectors at the
// container's bandwidth while later invocations compute.
class Container {
 public:
  struct Hooks {
    std::function<void(const BlockSignal&)> on_block_signal;
    std::function<void(Container&, const FluCompletion&)> on_complete;
    std::function<void(Container&, const TransferFault&)> on_transfer_fault;
    // One destination of an emission has its END acked.
    std::function<void(Container&, const RequestId&, const DataName&, const FunctionName&)>
        on_flow_done;
    std::function<void(const ContainerEvent&)> on_event;
  };

  Container(ContainerId id, const WorkflowDefinition& def, const FunctionName& function,
            const Placement& placement, NodeId node, EventLoop& loop, DataPlane& dataplane,
            const RuntimeConfig& config, std::shared_ptr<FluStats> stats, Hooks hooks);

  Container(const Container&) = delete;
  Container& operator=(const Container&) = delete;

  ContainerId id() const { return state_.id; }
  const FunctionSpec& spec() const { return spec_; }
  const ContainerState& state() const { return state_; }
  ContainerState& state() { return state_; }
  TokenBucket& bucket() { return bucket_; }
  const FluStats& flu_stats() const { return *stats_; }

  // Throws Error(kNoIdleSlot) if no slot is idle.
  FluCompletion invoke_flu(const RequestId& request, const InputBundle& inputs,
                           const InvokeOptions& options = {});

  // Enqueues one output on the DLU and returns its pressure. Throws
  // Error(kUnknownData) or Error(kAmbiguousSwitch).
  PressureEstimate dlu_send(const RequestId& request, const DataName& data,
                            const Payload& payload,
                            const std::optional<std::string>& label = std::nullopt,
                            std::size_t slot = 0,
                            const std::optional<std::set<std::uint64_t>>& only_flows = {});

  // Starts draining the DLU queue if it is not already running.
  void dlu_pump();
  bool pump_stalled() const { return stalled_; }
  // Continues after the interrupted connector was rewound.
  void resume_pump();
  // Gives up on a flow whose retention is gone; the connector is reset so a
  // regenerated emission can stream it again from sequence 0.
  void abandon_flow(const FlowKey& flow);

  void block_slot(std::size_t slot, Nanos until);
  void mark_recycled(Nanos now);

  std::uint64_t chunks_pumped() const { return chunks_pumped_; }

 private:
  void emit(const RequestId& request, const Payload& output, std::size_t slot,
            const InvokeOptions& options);
  void complete(std::size_t slot, FluCompletion completion);
  void transmit_head();
  void touch(Nanos now);
  void record(const std::string& event, const std::string& detail);

  const WorkflowDefinition& def_;
  const FunctionSpec& spec_;
  const Placement& placement_;
  EventLoop& loop_;
  DataPlane& dataplane_;
  const RuntimeConfig& config_;
  std::shared_ptr<FluStats> stats_;
  Hooks hooks_;
  ContainerState state_;
  TokenBucket bucket_;

  bool pumping_ = false;  // a transmission is scheduled
  bool stalled_ = false;  // waiting for recovery of the head flow
  std::uint64_t chunks_pumped_ = 0;
};

}  // namespace flowrt
