// SPDX-License-Identifier: Apache-2.0
#include "flowrt/sink/data_sink.hpp"

#include "flowrt/common/error.hpp"
#include "flowrt/common/hash.hpp"

namespace flowrt {

const char* to_string(MatchStatus s) noexcept {
  switch (s) {
    case MatchStatus::kPartial: return "PARTIAL";
    case MatchStatus::kDataComplete: return "DATA_COMPLETE";
    case MatchStatus::kFunctionReady: return "FUNCTION_READY";
  }
  return "?";
}

std::uint64_t WaitMatchKey::hash() const {
  auto h = fnv1a64(std::span<const std::uint8_t>(request_id.bytes));
  h = fnv1a64(function, h);
  h = fnv1a64(std::string_view("\0", 1), h);
  return fnv1a64(data, h);
}

DataSink::DataSink(NodeId node, const Clock& clock, SinkOptions options)
    : node_(std::move(node)),
      clock_(clock),
      options_(std::move(options)),
      spill_(options_.spill_root),
      last_account_(clock.now()) {}

void DataSink::register_function(const FunctionName& fn, std::vector<DataName> declared_inputs) {
  std::lock_guard lock(mu_);
  declared_[fn] = std::move(declared_inputs);
}

void DataSink::register_flow(FlowId flow, const FunctionName& dest, const DataName& data) {
  std::lock_guard lock(mu_);
  if (!declared_.count(dest))
    throw Error(Errc::kConfig, "flow into unregistered function '" + dest + "'");
  routes_[flow.value] = Route{dest, data};
}

void DataSink::configure(const WorkflowDefinition& def, const LocalDataFlowGraph& graph) {
  for (const auto& fn : graph.local_functions) {
    auto inputs = def.function(fn).declared_inputs;
    if (fn == def.entry && inputs.empty()) inputs.push_back(def.entry_input());
    register_function(fn, std::move(inputs));
  }
  for (const auto& e : graph.inbound) register_flow(e.flow_id(), e.destination, e.data_name);
  if (graph.hosts(def.entry))
    register_flow(make_flow_id(kGatewaySource, def.entry_input(), def.entry), def.entry,
                  def.entry_input());
}

void DataSink::set_ready_listener(ReadyListener listener) {
  std::lock_guard lock(mu_);
  listener_ = std::move(listener);
}

void DataSink::account(Nanos now) {
  if (now > last_account_) {
    byte_nanos_ += static_cast<Int128>(stats_.resident_bytes) * (now - last_account_).count();
    last_account_ = now;
  }
}

void DataSink::set_resident(std::int64_t delta) {
  stats_.resident_bytes = static_cast<std::uint64_t>(
      static_cast<std::int64_t>(stats_.resident_bytes) + delta);
}

DataSink::FunctionState& DataSink::function_state(const RequestId& request,
                                                  const FunctionName& fn) {
  auto [it, inserted] = functions_.try_emplace({request, fn});
  if (inserted) {
    const auto& decl = declared_.at(fn);
    it->second.missing.insert(decl.begin(), decl.end());
  }
  return it->second;
}

MatchStatus DataSink::status_of(const WaitMatchKey& key) const {
  auto f = functions_.find({key.request_id, key.function});
  if (f != functions_.end() && f->second.ready) return MatchStatus::kFunctionReady;
  auto e = entries_.find(key);
  if (e != entries_.end() && e->second.complete) return MatchStatus::kDataComplete;
  return MatchStatus::kPartial;
}

MatchStatus DataSink::put(const FlowChunk& chunk) {
  bool notify = false;
  WaitMatchKey key;
  MatchStatus status;
  ReadyListener listener;
  {
    std::lock_guard lock(mu_);
    account(clock_.now());
    auto route = routes_.find(chunk.flow_id.value);
    if (route == routes_.end()) {
      ++stats_.unknown_flow_chunks;
      return MatchStatus::kPartial;
    }
    auto [fit, fresh] = flows_.try_emplace(chunk.key());
    FlowState& fs = fit->second;
    if (fresh) fs.key = {chunk.request_id, route->second.function, route->second.data};
    key = fs.key;

    bool stale = fs.rejected || fs.complete || chunk.seq < fs.next_seq ||
                 fs.out_of_order.count(chunk.seq) || (fs.end_seq && chunk.seq > *fs.end_seq);
    if (stale) {
      ++stats_.duplicate_chunks;
      return status_of(key);
    }

    auto [eit, created] = entries_.try_emplace(key);
    Entry& e = eit->second;
    if (created) {
      e.arrived_at = clock_.now();
      e.owner = chunk.flow_id;
    } else if (e.owner != chunk.flow_id) {
      fs.rejected = true;
      ++stats_.duplicate_chunks;
      return status_of(key);
    }

    ++stats_.chunks_accepted;
    if (chunk.is_end()) fs.end_seq = chunk.seq;
    set_resident(static_cast<std::int64_t>(chunk.payload.size()));
    if (chunk.seq == fs.next_seq) {
      if (!chunk.payload.empty()) e.parts.push_back(chunk.payload);
      e.size += chunk.payload.size();
      ++fs.next_seq;
      for (auto it = fs.out_of_order.find(fs.next_seq); it != fs.out_of_order.end();
           it = fs.out_of_order.find(fs.next_seq)) {
        if (!it->second.empty()) e.parts.push_back(it->second);
        e.size += it->second.size();
        fs.out_of_order.erase(it);
        ++fs.next_seq;
      }
    } else {
      fs.out_of_order.emplace(chunk.seq, chunk.payload);
    }

    if (fs.end_seq && fs.next_seq == *fs.end_seq + 1) {
      fs.complete = true;
      e.complete = true;
      auto& st = function_state(key.request_id, key.function);
      st.missing.erase(key.data);
      if (st.missing.empty() && !st.ready) {
        st.ready = true;
        notify = true;
        listener = listener_;
      }
    }
    status = status_of(key);
  }
  if (notify && listener) listener(key.request_id, key.function);
  return status;
}

std::optional<std::uint64_t> DataSink::acked_seq(const FlowKey& flow) const {
  std::lock_guard lock(mu_);
  auto it = flows_.find(flow);
  if (it == flows_.end() || it->second.next_seq == 0) return std::nullopt;
  return it->second.next_seq - 1;
}

bool DataSink::flow_complete(const FlowKey& flow) const {
  std::lock_guard lock(mu_);
  auto it = flows_.find(flow);
  return it != flows_.end() && it->second.complete;
}

Payload DataSink::materialize(const WaitMatchKey& key, Entry& e) {
  if (e.location == Location::kSpilled) {
    auto bytes = spill_.read(key.function, key.hash());
    ++stats_.spill_reloads;
    return Payload(std::move(bytes));
  }
  if (e.parts.size() == 1) return e.parts.front();
  if (e.parts.empty()) return Payload();
  Payload whole = concat(e.parts);
  e.parts.assign(1, whole);
  return whole;
}

InputBundle DataSink::take(const RequestId& request, const FunctionName& fn,
                           std::uint64_t flu_id) {
  std::lock_guard lock(mu_);
  account(clock_.now());
  auto fit = functions_.find({request, fn});
  if (fit == functions_.end() || !fit->second.ready) {
    ++stats_.misses;
    throw Error(Errc::kNotReady, "inputs of '" + fn + "' are not ready");
  }
  const auto& decl = declared_.at(fn);
  for (const auto& data : decl) {
    if (!entries_.count({request, fn, data})) {
      ++stats_.misses;
      throw Error(Errc::kNotReady, "input '" + data + "' of '" + fn + "' was released");
    }
  }
  if (fit->second.taken_by) {
    ++stats_.duplicate_take_attempts;
    throw Error(Errc::kAlreadyTaken, "inputs of '" + fn + "' already taken by FLU " +
                                         std::to_string(*fit->second.taken_by));
  }
  InputBundle bundle;
  for (const auto& data : decl) {
    WaitMatchKey key{request, fn, data};
    bundle.emplace(data, materialize(key, entries_.at(key)));
  }
  for (const auto& data : decl) {
    auto& e = entries_.at({request, fn, data});
    if (!e.delivered_to.empty()) ++stats_.duplicate_deliveries;
    e.delivered_to.insert(flu_id);
  }
  fit->second.taken_by = flu_id;
  ++stats_.hits;
  return bundle;
}

bool DataSink::is_ready(const RequestId& request, const FunctionName& fn) const {
  std::lock_guard lock(mu_);
  auto it = functions_.find({request, fn});
  return it != functions_.end() && it->second.ready;
}

std::uint64_t DataSink::drop_entry(std::map<WaitMatchKey, Entry>::iterator it) {
  Entry& e = it->second;
  std::uint64_t freed = e.size;
  if (e.location == Location::kMemory) {
    std::uint64_t buffered = 0;
    auto f = flows_.find({it->first.request_id, e.owner});
    if (f != flows_.end())
      for (const auto& [seq, p] : f->second.out_of_order) buffered += p.size();
    set_resident(-static_cast<std::int64_t>(e.size + buffered));
  } else {
    spill_.remove(it->first.function, it->first.hash());
    stats_.spilled_bytes -= e.size;
  }
  ++stats_.releases;
  stats_.released_bytes += freed;
  entries_.erase(it);
  return freed;
}

std::uint64_t DataSink::proactive_release(const RequestId& request, const FunctionName& fn,
                                          const DataName& data) {
  std::lock_guard lock(mu_);
  account(clock_.now());
  auto it = entries_.find({request, fn, data});
  if (it == entries_.end()) return 0;
  auto f = functions_.find({request, fn});
  if (f == functions_.end() || !f->second.taken_by)
    throw Error(Errc::kStillNeeded, "'" + data + "' not yet taken by '" + fn + "'");
  return drop_entry(it);
}

std::uint64_t DataSink::release_request(const RequestId& request) {
  std::lock_guard lock(mu_);
  account(clock_.now());
  std::uint64_t freed = 0;
  auto it = entries_.lower_bound(WaitMatchKey{request, {}, {}});
  while (it != entries_.end() && it->first.request_id == request) {
    auto next = std::next(it);
    freed += drop_entry(it);
    it = next;
  }
  return freed;
}

void DataSink::forget_request(const RequestId& request) {
  release_request(request);
  std::lock_guard lock(mu_);
  auto f = flows_.lower_bound(FlowKey{request, FlowId{0}});
  while (f != flows_.end() && f->first.request == request) f = flows_.erase(f);
  auto s = functions_.lower_bound({request, FunctionName{}});
  while (s != functions_.end() && s->first.first == request) s = functions_.erase(s);
  auto c = checkpoints_.lower_bound(FlowKey{request, FlowId{0}});
  while (c != checkpoints_.end() && c->first.request == request) c = checkpoints_.erase(c);
}

std::vector<WaitMatchKey> DataSink::expire_sweep(Nanos now) {
  std::lock_guard lock(mu_);
  account(clock_.now());
  std::vector<WaitMatchKey> spilled;
  for (auto& [key, e] : entries_) {
    if (e.location != Location::kMemory || !e.complete) continue;
    if (now - e.arrived_at <= options_.ttl) continue;
    try {
      Payload whole = materialize(key, e);
      spill_.write(key.function, key.hash(), whole.view());
    } catch (const Error&) {
      ++stats_.spill_failures;
      continue;
    }
    e.location = Location::kSpilled;
    e.parts.clear();
    set_resident(-static_cast<std::int64_t>(e.size));
    stats_.spilled_bytes += e.size;
    ++stats_.spills;
    spilled.push_back(key);
  }
  return spilled;
}

void DataSink::store_checkpoint(const Checkpoint& cp) {
  std::lock_guard lock(mu_);
  auto [it, fresh] = checkpoints_.try_emplace(cp.key(), cp);
  if (fresh) return;
  // Never move a checkpoint backwards.
  if (cp.acked_seq && (!it->second.acked_seq || *cp.acked_seq >= *it->second.acked_seq))
    it->second = cp;
}

std::optional<Checkpoint> DataSink::load_checkpoint(const FlowKey& flow) const {
  std::lock_guard lock(mu_);
  auto it = checkpoints_.find(flow);
  if (it == checkpoints_.end()) return std::nullopt;
  return it->second;
}

SinkStats DataSink::stats() const {
  std::lock_guard lock(mu_);
  SinkStats s = stats_;
  Int128 total = byte_nanos_;
  Nanos now = clock_.now();
  if (now > last_account_)
    total += static_cast<Int128>(stats_.resident_bytes) * (now - last_account_).count();
  s.byte_seconds = static_cast<double>(total) / 1e9;
  return s;
}

std::optional<EntryInfo> DataSink::inspect(const WaitMatchKey& key) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  const Entry& e = it->second;
  return EntryInfo{key, e.size, e.complete, e.location, e.arrived_at, e.delivered_to};
}

std::size_t DataSink::entry_count() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

}  // namespace flowrt
