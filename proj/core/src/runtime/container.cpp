// SPDX-License-Identifier: Apache-2.0
#include "flowrt/runtime/container.hpp"

#include <algorithm>
#include <cmath>

#include "flowrt/common/error.hpp"
#include "flowrt/common/units.hpp"

namespace flowrt {

const char* to_string(SlotStatus s) noexcept {
  switch (s) {
    case SlotStatus::kIdle: return "IDLE";
    case SlotStatus::kRunning: return "RUNNING";
    case SlotStatus::kBlocked: return "BLOCKED";
  }
  return "?";
}

std::optional<std::size_t> ContainerState::idle_slot(Nanos now) const {
  for (std::size_t i = 0; i < slots.size(); ++i)
    if (slots[i].status(now) == SlotStatus::kIdle) return i;
  return std::nullopt;
}

bool ContainerState::all_slots_idle(Nanos now) const {
  return std::all_of(slots.begin(), slots.end(),
                     [&](const FluSlot& s) { return s.status(now) == SlotStatus::kIdle; });
}

bool ContainerState::has_unacked_flow() const {
  return std::any_of(open_flows.begin(), open_flows.end(),
                     [](const ConnectorPtr& h) { return h && !h->end_acked; });
}

void ContainerState::prune_flows() {
  open_flows.erase(std::remove_if(open_flows.begin(), open_flows.end(),
                                  [](const ConnectorPtr& h) { return !h || h->end_acked; }),
                   open_flows.end());
}

bool is_recyclable(const ContainerState& c, Nanos now) {
  return !c.recycled && c.all_slots_idle(now) && c.dlu_queue.empty() &&
         !c.has_unacked_flow() && now > c.keepalive_deadline;
}

namespace {

Nanos fraction_of(Nanos d, double f) {
  return Nanos{static_cast<std::int64_t>(std::llround(static_cast<double>(d.count()) * f))};
}

}  // namespace

Container::Container(ContainerId id, const WorkflowDefinition& def, const FunctionName& function,
                     const Placement& placement, NodeId node, EventLoop& loop,
                     DataPlane& dataplane, const RuntimeConfig& config,
                     std::shared_ptr<FluStats> stats, Hooks hooks)
    : def_(def),
      spec_(def.function(function)),
      placement_(placement),
      loop_(loop),
      dataplane_(dataplane),
      config_(config),
      stats_(stats ? std::move(stats) : std::make_shared<FluStats>()),
      hooks_(std::move(hooks)),
      bucket_(spec_.resources().bandwidth_bps(), kChunkSize * 8) {
  state_.id = id;
  state_.function = function;
  state_.node = std::move(node);
  state_.resources = spec_.resources();
  state_.slots.resize(static_cast<std::size_t>(std::max(1, config.flu_slots)));
  state_.created_at = loop.now();
  touch(loop.now());
  if (stats_->function.empty()) {
    stats_->function = function;
    stats_->weight = config.ewma_beta;
  }
}

void Container::record(const std::string& event, const std::string& detail) {
  if (hooks_.on_event) hooks_.on_event(ContainerEvent{loop_.now(), state_.id, event, detail});
}

void Container::touch(Nanos now) {
  state_.last_active = std::max(state_.last_active, now);
  state_.keepalive_deadline = state_.last_active + config_.keepalive;
}

FluCompletion Container::invoke_flu(const RequestId& request, const InputBundle& inputs,
                                    const InvokeOptions& options) {
  Nanos now = loop_.now();
  auto slot = state_.recycled ? std::nullopt : state_.idle_slot(now);
  if (!slot)
    throw Error(Errc::kNoIdleSlot, "container " + std::to_string(state_.id) + " has no idle slot");
  FluSlot& s = state_.slots[*slot];
  s.running = true;
  s.request = request;
  s.started_at = now;
  touch(now);

  Nanos duration = spec_.compute.duration(bundle_size(inputs), state_.resources.cpu_cores);
  FluCompletion c;
  c.request = request;
  c.container = state_.id;
  c.slot = *slot;
  c.started_at = now;
  c.emit_at = now + fraction_of(duration, spec_.compute.emit_fraction);
  c.completes_at = now + duration;
  c.output = apply_transform(spec_, inputs);
  c.emitted = true;
  if (options.fault_at) {
    c.faulted = true;
    c.completes_at = now + fraction_of(duration, *options.fault_at);
    c.emitted = spec_.compute.emit_fraction <= *options.fault_at;
  }
  record("INVOKED", "request=" + request.hex() + " slot=" + std::to_string(*slot) +
                        " duration_ms=" + format_double(to_millis(duration)));

  if (c.emitted) {
    loop_.schedule_at(c.emit_at, [this, request, output = c.output, slot = *slot, options] {
      emit(request, output, slot, options);
    });
  }
  loop_.schedule_at(c.completes_at, [this, slot = *slot, c] { complete(slot, c); });
  return c;
}

void Container::emit(const RequestId& request, const Payload& output, std::size_t slot,
                     const InvokeOptions& options) {
  for (const FlowEdge* edge : def_.outgoing(spec_.name)) {
    if (options.suppress.count(edge->data_name)) continue;
    std::optional<std::string> label;
    if (edge->conditional)
      label = select_label(spec_.switch_selector.value_or(SwitchSelector{}), edge->labels, output);
    dlu_send(request, edge->data_name, output, label, slot, options.only_flows);
  }
}

void Container::complete(std::size_t slot, FluCompletion c) {
  FluSlot& s = state_.slots[slot];
  s.running = false;
  s.request.reset();
  Nanos now = loop_.now();
  if (!c.faulted) *stats_ = update_flu_stats(*stats_, to_seconds(c.completes_at - c.started_at));
  touch(now);
  record(c.faulted ? "FAULTED" : "COMPLETED", "request=" + c.request.hex());
  if (hooks_.on_complete) hooks_.on_complete(*this, c);
}

PressureEstimate Container::dlu_send(const RequestId& request, const DataName& data,
                                     const Payload& payload,
                                     const std::optional<std::string>& label, std::size_t slot,
                                     const std::optional<std::set<std::uint64_t>>& only_flows) {
  const FlowEdge* edge = def_.outgoing_edge(spec_.name, data);
  if (!edge)
    throw Error(Errc::kUnknownData, "'" + spec_.name + "' has no output named '" + data + "'");

  std::vector<std::size_t> chosen;
  if (edge->conditional) {
    if (!label) throw Error(Errc::kAmbiguousSwitch, "switch output '" + data + "' without label");
    for (std::size_t i = 0; i < edge->labels.size(); ++i)
      if (edge->labels[i] == *label) chosen.push_back(i);
    if (chosen.size() != 1)
      throw Error(Errc::kAmbiguousSwitch, "label '" + *label + "' resolves to " +
                                              std::to_string(chosen.size()) + " destinations");
  } else {
    for (std::size_t i = 0; i < edge->destinations.size(); ++i) chosen.push_back(i);
  }

  OutboundEmission em;
  em.request = request;
  em.data = data;
  em.payload = payload;
  em.emitted_at = loop_.now();
  std::uint64_t size = 0;
  for (std::size_t i : chosen) {
    EmissionTarget t;
    t.function = edge->destinations[i];
    t.node = placement_.node_of(t.function);
    t.flow = make_flow_id(spec_.name, data, t.function);
    if (only_flows && !only_flows->count(t.flow.value)) continue;
    t.payload = edge->conditional
                    ? payload
                    : route_payload(spec_, payload, i, edge->destinations.size());
    size += t.payload.size();
    em.targets.push_back(std::move(t));
  }

  auto estimate = estimate_pressure(size, state_.resources.bandwidth_bps(), stats_->t_flu(),
                                    config_.alpha);
  if (em.targets.empty()) return estimate;

  record("PRESSURE", "request=" + request.hex() + " data=" + data +
                         " size=" + std::to_string(size) +
                         " t_flu=" + format_double(estimate.t_flu) +
                         " pressure=" + format_double(estimate.pressure));
  state_.dlu_queue.push_back(std::move(em));
  if (estimate.blocks() && hooks_.on_block_signal)
    hooks_.on_block_signal(
        BlockSignal{spec_.name, state_.id, slot, estimate.pressure, loop_.now()});
  dlu_pump();
  return estimate;
}

void Container::dlu_pump() {
  if (pumping_ || stalled_) return;
  Nanos now = loop_.now();
  while (!state_.dlu_queue.empty()) {
    OutboundEmission& em = state_.dlu_queue.front();
    if (em.done()) {
      state_.dlu_queue.pop_front();
      touch(now);
      continue;
    }
    EmissionTarget& t = em.targets[em.next_target];
    if (!t.connector) {
      try {
        t.connector = dataplane_.open_connector({em.request, t.flow}, state_.node, t.node,
                                                t.payload.size());
      } catch (const Error& e) {
        if (e.code() != Errc::kNetworkUnreachable) throw;
        stalled_ = true;
        if (hooks_.on_transfer_fault)
          hooks_.on_transfer_fault(*this, TransferFault{em.request, em.data, t.function, nullptr});
        return;
      }
      ConnectorHandle& h = *t.connector;
      if (!h.end_acked && h.retained.empty() && h.next_seq == 0 && !h.retention_lost)
        dataplane_.load(h, t.payload);
      state_.open_flows.push_back(t.connector);
    }
    ConnectorHandle& h = *t.connector;
    if (h.end_acked) {
      ++em.next_target;
      state_.prune_flows();
      if (hooks_.on_flow_done) hooks_.on_flow_done(*this, em.request, em.data, t.function);
      continue;
    }
    if (h.interrupted || h.next_seq >= h.retained.size()) {
      stalled_ = true;
      if (hooks_.on_transfer_fault)
        hooks_.on_transfer_fault(*this, TransferFault{em.request, em.data, t.function, t.connector});
      return;
    }
    Nanos wait{0};
    if (h.crosses_nodes()) wait = bucket_.acquire(h.retained[h.next_seq].payload.size() * 8, now);
    if (wait > Nanos{0}) {
      pumping_ = true;
      loop_.schedule_after(wait, [this] {
        pumping_ = false;
        transmit_head();
        dlu_pump();
      });
      return;
    }
    transmit_head();
    if (stalled_) return;
  }
}

void Container::transmit_head() {
  if (stalled_ || state_.dlu_queue.empty()) return;
  OutboundEmission& em = state_.dlu_queue.front();
  if (em.done()) return;
  EmissionTarget& t = em.targets[em.next_target];
  try {
    dataplane_.send_next(*t.connector);
    ++chunks_pumped_;
  } catch (const Error& e) {
    if (e.code() != Errc::kTransferInterrupted && e.code() != Errc::kRetentionLost) throw;
    stalled_ = true;
    record("INTERRUPTED", "request=" + em.request.hex() + " data=" + em.data + " dest=" +
                              t.function + " seq=" + std::to_string(t.connector->next_seq));
    if (hooks_.on_transfer_fault)
      hooks_.on_transfer_fault(*this, TransferFault{em.request, em.data, t.function, t.connector});
  }
}

void Container::resume_pump() {
  stalled_ = false;
  dlu_pump();
}

void Container::abandon_flow(const FlowKey& flow) {
  for (auto& em : state_.dlu_queue) {
    if (em.request != flow.request) continue;
    for (std::size_t i = em.next_target; i < em.targets.size(); ++i) {
      if (em.targets[i].flow != flow.flow) continue;
      if (em.targets[i].connector) dataplane_.reset(*em.targets[i].connector);
      em.targets.erase(em.targets.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  stalled_ = false;
  dlu_pump();
}

void Container::block_slot(std::size_t slot, Nanos until) {
  if (slot >= state_.slots.size()) return;
  auto& s = state_.slots[slot];
  s.blocked_until = std::max(s.blocked_until, until);
  record("BLOCKED", "slot=" + std::to_string(slot) +
                        " until_ms=" + format_double(to_millis(s.blocked_until)));
}

void Container::mark_recycled(Nanos now) {
  state_.recycled = true;
  state_.last_active = now;
  record("RECYCLED", "");
}

}  // namespace flowrt
