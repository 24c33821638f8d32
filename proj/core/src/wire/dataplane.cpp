// SPDX-License-Identifier: Apache-2.0
#include "flowrt/wire/dataplane.hpp"

#include "flowrt/common/error.hpp"

namespace flowrt {

const char* to_string(ConnectorKind kind) noexcept {
  switch (kind) {
    case ConnectorKind::kLocal: return "LOCAL";
    case ConnectorKind::kRemote: return "REMOTE";
    case ConnectorKind::kSmall: return "SMALL";
  }
  return "?";
}

DataPlane::DataPlane(const Clock& clock, CheckpointPolicy policy, bool frame_remote)
    : clock_(clock), policy_(policy), frame_remote_(frame_remote) {}

void DataPlane::attach_sink(const NodeId& node, DataSink* sink) {
  std::lock_guard lock(mu_);
  sinks_[node] = sink;
}

DataSink* DataPlane::sink(const NodeId& node) const {
  std::lock_guard lock(mu_);
  auto it = sinks_.find(node);
  return it == sinks_.end() ? nullptr : it->second;
}

void DataPlane::set_node_down(const NodeId& node, bool down) {
  std::lock_guard lock(mu_);
  if (down) down_.insert(node);
  else down_.erase(node);
}

void DataPlane::set_interrupt_hook(InterruptHook hook) {
  std::lock_guard lock(mu_);
  hook_ = std::move(hook);
}

ConnectorPtr DataPlane::open_connector(const FlowKey& flow, const NodeId& src_node,
                                       const NodeId& dst_node, std::uint64_t size_hint) {
  std::lock_guard lock(mu_);
  if (auto it = handles_.find(flow); it != handles_.end()) return it->second;
  if (down_.count(dst_node) || !sinks_.count(dst_node))
    throw Error(Errc::kNetworkUnreachable, "node '" + dst_node + "' is unreachable");
  auto h = std::make_shared<ConnectorHandle>();
  h->flow = flow;
  h->src_node = src_node;
  h->dst_node = dst_node;
  h->size_hint = size_hint;
  h->last_checkpoint = clock_.now();
  if (size_hint < kSmallDataThreshold) {
    h->kind = ConnectorKind::kSmall;
    ++counters_.small_transfers;
  } else if (src_node == dst_node) {
    h->kind = ConnectorKind::kLocal;
    ++counters_.local_connectors;
  } else {
    h->kind = ConnectorKind::kRemote;
    ++counters_.remote_connectors;
  }
  handles_.emplace(flow, h);
  return h;
}

ConnectorPtr DataPlane::find_connector(const FlowKey& flow) const {
  std::lock_guard lock(mu_);
  auto it = handles_.find(flow);
  return it == handles_.end() ? nullptr : it->second;
}

void DataPlane::load(ConnectorHandle& h, const Payload& payload) const {
  h.retained = chunk_payload(h.flow.request, h.flow.flow, payload);
  h.retention_lost = false;
}

SendReceipt DataPlane::send_chunk(ConnectorHandle& h, const FlowChunk& chunk) {
  InterruptHook hook;
  DataSink* sink = nullptr;
  bool down = false;
  {
    std::lock_guard lock(mu_);
    hook = hook_;
    auto it = sinks_.find(h.dst_node);
    if (it != sinks_.end()) sink = it->second;
    down = down_.count(h.dst_node) > 0;
  }
  if (h.interrupted)
    throw Error(Errc::kTransferInterrupted, "connector interrupted; replay required");
  if (chunk.seq != h.next_seq)
    throw Error(Errc::kSeqGap, "expected seq " + std::to_string(h.next_seq) + ", got " +
                                   std::to_string(chunk.seq));
  if (chunk.payload.size() > kChunkSize)
    throw Error(Errc::kInvalidArgument, "chunk payload exceeds chunk size");
  if (down || !sink || (hook && hook(h, chunk))) {
    h.interrupted = true;
    std::lock_guard lock(mu_);
    ++counters_.interrupts;
    throw Error(Errc::kTransferInterrupted,
                "connection to '" + h.dst_node + "' lost at seq " + std::to_string(chunk.seq));
  }

  bool framed = frame_remote_ && h.crosses_nodes();
  if (framed) {
    Bytes wire;
    encode_frame_into(chunk, wire);
    auto decoded = decode_frame(wire);
    std::lock_guard lock(mu_);
    ++counters_.frames_encoded;
    counters_.bytes_framed += wire.size();
    if (auto* err = std::get_if<FrameError>(&decoded)) {
      ++counters_.frame_errors;
      h.interrupted = true;
      throw Error(Errc::kTransferInterrupted, std::string("corrupt frame: ") + to_string(*err));
    }
  }
  sink->put(chunk);
  {
    std::lock_guard lock(mu_);
    ++counters_.chunks_sent;
  }
  ++h.next_seq;

  SendReceipt r;
  auto acked = sink->acked_seq(h.flow);
  if (acked && (!h.acked_seq || *acked > *h.acked_seq)) {
    h.acked_since_checkpoint += *acked - h.acked_seq.value_or(static_cast<std::uint64_t>(-1));
    h.acked_seq = acked;
  }
  h.end_acked = sink->flow_complete(h.flow);
  r.acked_seq = h.acked_seq;
  r.end_acked = h.end_acked;

  Nanos now = clock_.now();
  if (h.end_acked || h.acked_since_checkpoint >= policy_.every_chunks ||
      now - h.last_checkpoint >= policy_.every)
    checkpoint_flow(h);
  if (h.end_acked) h.retained.clear();
  return r;
}

SendReceipt DataPlane::send_next(ConnectorHandle& h) {
  if (h.retention_lost || h.next_seq >= h.retained.size())
    throw Error(Errc::kRetentionLost, "no retained chunk " + std::to_string(h.next_seq));
  FlowChunk chunk = h.retained[h.next_seq];
  return send_chunk(h, chunk);
}

Checkpoint DataPlane::checkpoint_flow(ConnectorHandle& h) {
  Checkpoint cp{h.flow.request, h.flow.flow, h.acked_seq, clock_.now()};
  if (DataSink* s = sink(h.dst_node)) {
    s->store_checkpoint(cp);
    if (auto stored = s->load_checkpoint(h.flow)) cp = *stored;
  }
  h.acked_since_checkpoint = 0;
  h.last_checkpoint = cp.at;
  std::lock_guard lock(mu_);
  ++counters_.checkpoints;
  return cp;
}

Checkpoint DataPlane::last_checkpoint(const ConnectorHandle& h) const {
  if (DataSink* s = sink(h.dst_node))
    if (auto cp = s->load_checkpoint(h.flow)) return *cp;
  return Checkpoint{h.flow.request, h.flow.flow, std::nullopt, Nanos{0}};
}

void DataPlane::replay_from(ConnectorHandle& h, const Checkpoint& cp) {
  if (h.end_acked) {
    h.interrupted = false;
    return;
  }
  if (h.retention_lost || h.retained.empty())
    throw Error(Errc::kRetentionLost, "sender no longer holds chunks from seq " +
                                          std::to_string(cp.resume_seq()));
  if (cp.resume_seq() > h.retained.size())
    throw Error(Errc::kInvalidArgument, "checkpoint beyond the end of the flow");
  {
    std::lock_guard lock(mu_);
    if (down_.count(h.dst_node) || !sinks_.count(h.dst_node))
      throw Error(Errc::kNetworkUnreachable, "node '" + h.dst_node + "' is unreachable");
    ++counters_.replays;
  }
  h.next_seq = cp.resume_seq();
  h.interrupted = false;
}

void DataPlane::purge_retention(ConnectorHandle& h) {
  h.retained.clear();
  h.retention_lost = true;
}

void DataPlane::reset(ConnectorHandle& h) {
  h.retained.clear();
  h.retention_lost = false;
  h.next_seq = 0;
  h.interrupted = false;
  h.acked_since_checkpoint = 0;
}

void DataPlane::inject(const NodeId& node, const RequestId& request, const FunctionName& entry,
                       const DataName& data, const Payload& payload) {
  DataSink* s = sink(node);
  if (!s) throw Error(Errc::kNetworkUnreachable, "node '" + node + "' has no sink");
  {
    std::lock_guard lock(mu_);
    ++counters_.ingress_transfers;
  }
  for (const auto& chunk : chunk_payload(request, make_flow_id(kGatewaySource, data, entry),
                                         payload))
    s->put(chunk);
}

void DataPlane::forget_request(const RequestId& request) {
  std::lock_guard lock(mu_);
  auto it = handles_.lower_bound(FlowKey{request, FlowId{0}});
  while (it != handles_.end() && it->first.request == request) it = handles_.erase(it);
}

DataPlaneCounters DataPlane::counters() const {
  std::lock_guard lock(mu_);
  return counters_;
}

}  // namespace flowrt
