// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <vector>

#include "flowrt/common/clock.hpp"
#include "flowrt/sink/data_sink.hpp"
#include "flowrt/wire/checkpoint.hpp"
#include "flowrt/wire/frame.hpp"

namespace flowrt {

enum class ConnectorKind { kLocal, kRemote, kSmall };

const char* to_string(ConnectorKind kind) noexcept;

// Send side of one flow. A connector has a single writer (one DLU pump).
struct ConnectorHandle {
  FlowKey flow;
  ConnectorKind kind = ConnectorKind::kLocal;
  NodeId src_node;
  NodeId dst_node;
  std::uint64_t size_hint = 0;

  // Every chunk of the transfer, held until END is acked.
  std::vector<FlowChunk> retained;
  bool retention_lost = false;

  std::uint64_t next_seq = 0;
  std::optional<std::uint64_t> acked_seq;
  bool end_acked = false;
  bool interrupted = false;

  std::size_t acked_since_checkpoint = 0;
  Nanos last_checkpoint{0};

  // Only bytes that leave the node consume container bandwidth.
  bool crosses_nodes() const { return src_node != dst_node; }
  bool has_pending() const { return !end_acked; }
  std::uint64_t total_chunks() const { return retained.size(); }
};

using ConnectorPtr = std::shared_ptr<ConnectorHandle>;

struct SendReceipt {
  std::optional<std::uint64_t> acked_seq;
  bool end_acked = false;
};

struct DataPlaneCounters {
  std::uint64_t local_connectors = 0;
  std::uint64_t remote_connectors = 0;
  std::uint64_t small_transfers = 0;
  std::uint64_t ingress_transfers = 0;
  std::uint64_t chunks_sent = 0;
  std::uint64_t frames_encoded = 0;
  std::uint64_t bytes_framed = 0;
  std::uint64_t interrupts = 0;
  std::uint64_t replays = 0;
  std::uint64_t checkpoints = 0;
  std::uint64_t frame_errors = 0;

  std::uint64_t streaming_connectors() const { return local_connectors + remote_connectors; }
};

struct CheckpointPolicy {
  std::size_t every_chunks = 8;
  Nanos every = from_millis(100);
};

// Virtual network between DLUs and node sinks. Propagation is instantaneous:
// time on the wire is modeled entirely by the sender's token bucket.
class DataPlane {
 public:
  // Returning true drops the chunk and interrupts the connector.
  using InterruptHook = std::function<bool(ConnectorHandle&, const FlowChunk&)>;

  explicit DataPlane(const Clock& clock, CheckpointPolicy policy = {},
                     bool frame_remote = true);

  void attach_sink(const NodeId& node, DataSink* sink);
  DataSink* sink(const NodeId& node) const;
  void set_node_down(const NodeId& node, bool down);
  void set_interrupt_hook(InterruptHook hook);

  // Idempotent per flow. Throws Error(kNetworkUnreachable) when `dst_node`
  // is down or unknown.
  ConnectorPtr open_connector(const FlowKey& flow, const NodeId& src_node,
                              const NodeId& dst_node, std::uint64_t size_hint);
  ConnectorPtr find_connector(const FlowKey& flow) const;

  // Loads the transfer into sender retention. Must precede the first send.
  void load(ConnectorHandle& h, const Payload& payload) const;

  // Delivers `chunk` to the destination sink: framed on REMOTE and on SMALL
  // across nodes, by reference otherwise. Throws Error(kSeqGap) for an
  // out-of-order sequence and Error(kTransferInterrupted) when the
  // connection drops (including any send on an interrupted connector).
  SendReceipt send_chunk(ConnectorHandle& h, const FlowChunk& chunk);
  // Sends retained chunk `h.next_seq`.
  SendReceipt send_next(ConnectorHandle& h);

  Checkpoint checkpoint_flow(ConnectorHandle& h);
  Checkpoint last_checkpoint(const ConnectorHandle& h) const;

  // Rewinds to cp.acked_seq + 1. No-op once END is acked. Throws
  // Error(kRetentionLost) if the retained chunks are gone.
  void replay_from(ConnectorHandle& h, const Checkpoint& cp);

  // Drops sender retention, as a crashed DLU would.
  void purge_retention(ConnectorHandle& h);
  // Restarts the flow from sequence 0 for a regenerated transfer.
  void reset(ConnectorHandle& h);

  // External request input: handed to the entry's sink by reference.
  void inject(const NodeId& node, const RequestId& request, const FunctionName& entry,
              const DataName& data, const Payload& payload);

  void forget_request(const RequestId& request);

  DataPlaneCounters counters() const;

 private:
  const Clock& clock_;
  CheckpointPolicy policy_;
  bool frame_remote_;
  InterruptHook hook_;

  mutable std::mutex mu_;
  std::map<NodeId, DataSink*> sinks_;
  std::set<NodeId> down_;
  std::map<FlowKey, ConnectorPtr> handles_;
  DataPlaneCounters counters_;
  Bytes scratch_;
};

}  // namespace flowrt
