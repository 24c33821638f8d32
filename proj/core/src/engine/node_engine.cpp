// SPDX-License-Identifier: Apache-2.0
#include "flowrt/engine/node_engine.hpp"

#include <algorithm>
#include <cstdio>

#include "flowrt/common/crc32.hpp"
#include "flowrt/common/error.hpp"
#include "flowrt/common/units.hpp"

namespace flowrt {

const char* to_string(InvocationStatus s) noexcept {
  switch (s) {
    case InvocationStatus::kWaiting: return "WAITING";
    case InvocationStatus::kReady: return "READY";
    case InvocationStatus::kDispatched: return "DISPATCHED";
    case InvocationStatus::kDone: return "DONE";
    case InvocationStatus::kFailed: return "FAILED";
  }
  return "?";
}

const char* to_string(ScaleReason r) noexcept {
  return r == ScaleReason::kPressure ? "PRESSURE" : "NO_IDLE_FLU";
}

namespace {

std::string digest(const Payload& p) {
  char crc[9];
  std::snprintf(crc, sizeof(crc), "%08x", crc32(p.view()));
  return std::to_string(p.size()) + ":" + crc;
}

std::string input_digest(const InputBundle& inputs) {
  std::string out;
  for (const auto& [name, p] : inputs) {
    if (!out.empty()) out += ',';
    out += name + ":" + digest(p);
  }
  return out;
}

}  // namespace

NodeEngine::NodeEngine(NodeSpec node, const WorkflowDefinition& def, const Placement& placement,
                       LocalDataFlowGraph graph, EventLoop& loop, DataPlane& dataplane,
                       DataSink& sink, const RuntimeConfig& config, EventLog& log, IdSource& ids,
                       EngineHooks hooks)
    : node_(std::move(node)),
      def_(def),
      placement_(placement),
      graph_(std::move(graph)),
      loop_(loop),
      dataplane_(dataplane),
      sink_(sink),
      config_(config),
      log_(log),
      ids_(ids),
      hooks_(std::move(hooks)),
      alive_(std::make_shared<bool>(true)) {}

NodeEngine::~NodeEngine() { *alive_ = false; }

void NodeEngine::log(const std::string& kind, const RequestId* request, const FunctionName& fn,
                     ContainerId container, std::string detail) {
  if (!log_.enabled()) return;
  log_.append(EngineEvent{loop_.now(), node_.id, kind, request ? request->hex() : std::string(),
                          fn, container, std::move(detail)});
}

std::shared_ptr<FluStats> NodeEngine::stats_for(const FunctionName& fn) {
  auto& s = stats_[fn];
  if (!s) {
    s = std::make_shared<FluStats>();
    s->function = fn;
    s->weight = config_.ewma_beta;
  }
  return s;
}

void NodeEngine::start() {
  running_ = true;
  std::weak_ptr<bool> alive = alive_;
  sink_.set_ready_listener([this, alive](const RequestId& r, const FunctionName& fn) {
    loop_.schedule_after(Nanos{0}, [this, alive, r, fn] {
      if (auto a = alive.lock(); a && *a) on_data_ready(r, fn);
    });
  });
  for (const auto& fn : graph_.local_functions)
    for (int i = 0; i < config_.prewarm_per_function; ++i)
      if (fits_on_node(def_.function(fn))) add_container(fn);
  schedule_sweeps();
}

void NodeEngine::stop() { running_ = false; }

void NodeEngine::schedule_sweeps() {
  std::weak_ptr<bool> alive = alive_;
  auto keepalive = std::make_shared<std::function<void()>>();
  *keepalive = [this, alive, keepalive] {
    auto a = alive.lock();
    if (!a || !*a || !running_) return;
    keepalive_sweep(loop_.now());
    loop_.schedule_after(config_.keepalive_sweep_interval, *keepalive);
  };
  loop_.schedule_after(config_.keepalive_sweep_interval, *keepalive);

  auto expire = std::make_shared<std::function<void()>>();
  *expire = [this, alive, expire] {
    auto a = alive.lock();
    if (!a || !*a || !running_) return;
    sink_.expire_sweep(loop_.now());
    loop_.schedule_after(config_.sink_sweep_interval, *expire);
  };
  loop_.schedule_after(config_.sink_sweep_interval, *expire);
}

Container& NodeEngine::create_container(const FunctionName& fn, bool warm) {
  ContainerId id = ids_.allocate();
  Container::Hooks hooks;
  hooks.on_block_signal = [this](const BlockSignal& s) { handle_block_signal(s); };
  hooks.on_complete = [this](Container& c, const FluCompletion& d) { on_complete(c, d); };
  hooks.on_transfer_fault = [this](Container& c, const TransferFault& f) {
    on_transfer_fault(c, f);
  };
  hooks.on_event = [this, fn](const ContainerEvent& e) {
    if (log_.enabled())
      log_.append(EngineEvent{e.at, node_.id, e.event, {}, fn, e.container, e.detail});
  };
  auto c = std::make_unique<Container>(id, def_, fn, placement_, node_.id, loop_, dataplane_,
                                       config_, stats_for(fn), std::move(hooks));
  Container& ref = *c;
  pool_[fn].push_back(Slot{std::move(c), warm});
  lifetimes_.push_back(ContainerLifetime{id, fn, node_.id, ref.spec().memory_mb, loop_.now(), {}});
  log("CREATED", nullptr, fn, id, warm ? "warm" : "cold");
  return ref;
}

Container& NodeEngine::add_container(const FunctionName& fn) { return create_container(fn, true); }

Container* NodeEngine::container(ContainerId id) const {
  for (const auto& [fn, slots] : pool_)
    for (const auto& s : slots)
      if (s.container->id() == id) return s.container.get();
  return nullptr;
}

std::vector<Container*> NodeEngine::containers(const FunctionName& fn) const {
  std::vector<Container*> out;
  if (auto it = pool_.find(fn); it != pool_.end())
    for (const auto& s : it->second) out.push_back(s.container.get());
  return out;
}

std::size_t NodeEngine::live_containers(const FunctionName& fn) const {
  std::size_t n = 0;
  if (auto it = pool_.find(fn); it != pool_.end())
    for (const auto& s : it->second)
      if (!s.container->state().recycled) ++n;
  return n;
}

std::size_t NodeEngine::pending(const FunctionName& fn) const {
  auto it = pending_.find(fn);
  return it == pending_.end() ? 0 : it->second.size();
}

InvocationStatus NodeEngine::status(const RequestId& request, const FunctionName& fn) const {
  auto r = table_.find(request);
  if (r == table_.end()) return InvocationStatus::kWaiting;
  auto f = r->second.find(fn);
  return f == r->second.end() ? InvocationStatus::kWaiting : f->second.status;
}

bool NodeEngine::fits_on_node(const FunctionSpec& spec) const {
  std::int64_t memory = 0;
  double cores = 0;
  for (const auto& [fn, slots] : pool_)
    for (const auto& s : slots)
      if (!s.container->state().recycled) {
        memory += s.container->state().resources.memory_mb;
        cores += s.container->state().resources.cpu_cores;
      }
  auto r = spec.resources();
  return memory + r.memory_mb <= node_.memory_mb && cores + r.cpu_cores <= node_.cores + 1e-9;
}

void NodeEngine::on_data_ready(const RequestId& request, const FunctionName& fn) {
  auto& st = table_[request][fn];
  if (st.status != InvocationStatus::kWaiting) {
    ++counters_.duplicate_ready;
    return;
  }
  st.status = InvocationStatus::kReady;
  log("READY", &request, fn, 0, {});
  pending_[fn].push_back(Invocation{request, fn, std::nullopt, {}});
  dispatch_pending(fn);
  maybe_scale(fn, std::nullopt);
}

Container* NodeEngine::pick_idle(const FunctionName& fn) {
  auto it = pool_.find(fn);
  if (it == pool_.end()) return nullptr;
  Nanos now = loop_.now();
  Container* best = nullptr;
  for (auto& s : it->second) {
    Container* c = s.container.get();
    if (!s.warm || c->state().recycled || !c->state().idle_slot(now)) continue;
    if (!best || c->state().last_active < best->state().last_active) best = c;
  }
  return best;
}

std::size_t NodeEngine::dispatch_pending(const FunctionName& fn) {
  auto it = pending_.find(fn);
  if (it == pending_.end()) return 0;
  std::size_t n = 0;
  while (!it->second.empty()) {
    Container* c = pick_idle(fn);
    if (!c) break;
    Invocation inv = std::move(it->second.front());
    it->second.pop_front();
    dispatch(*c, std::move(inv));
    ++n;
  }
  return n;
}

std::size_t NodeEngine::dispatch_pending(Nanos) {
  std::size_t n = 0;
  std::vector<FunctionName> fns;
  for (const auto& [fn, q] : pending_) fns.push_back(fn);
  for (const auto& fn : fns) n += dispatch_pending(fn);
  return n;
}

void NodeEngine::dispatch(Container& c, Invocation inv) {
  auto& st = table_[inv.request][inv.function];
  InputBundle inputs;
  if (inv.inputs) {
    inputs = std::move(*inv.inputs);
  } else {
    try {
      inputs = sink_.take(inv.request, inv.function, c.id());
    } catch (const Error& e) {
      fail_request(inv.request, e.what());
      return;
    }
    if (config_.release_policy == ReleasePolicy::kProactive)
      for (const auto& [data, payload] : inputs)
        sink_.proactive_release(inv.request, inv.function, data);
    lineage_[{inv.request, inv.function}] = inputs;
  }
  st.status = InvocationStatus::kDispatched;
  ++st.attempts;
  st.container = c.id();
  if (st.attempts == 1 && hooks_.flu_fault)
    if (auto f = hooks_.flu_fault(inv.request, inv.function)) inv.options.fault_at = *f;
  ++counters_.dispatches;
  log("DISPATCH", &inv.request, inv.function, c.id(),
      "attempt=" + std::to_string(st.attempts) + " inputs=" + input_digest(inputs));
  if (hooks_.on_dispatch) hooks_.on_dispatch(inv.request, inv.function, loop_.now());
  c.invoke_flu(inv.request, inputs, inv.options);
}

void NodeEngine::on_complete(Container& c, const FluCompletion& done) {
  const FunctionName& fn = c.spec().name;
  auto& st = table_[done.request][fn];
  if (done.faulted) {
    log("FAULT", &done.request, fn, c.id(), done.emitted ? "after-emit" : "before-emit");
    FaultReport r;
    r.kind = FaultReport::Kind::kFlu;
    r.request = done.request;
    r.function = fn;
    r.container = c.id();
    try {
      RedoPlan plan = plan_redo(done.request, r);
      if (done.emitted)
        for (const auto* e : def_.outgoing(fn)) plan.suppress.insert(e->data_name);
      std::weak_ptr<bool> alive = alive_;
      loop_.schedule_after(config_.redo_delay, [this, alive, plan] {
        if (auto a = alive.lock(); a && *a) execute_redo(plan);
      });
    } catch (const Error& e) {
      fail_request(done.request, e.what());
    }
  } else if (st.status == InvocationStatus::kDispatched) {
    st.status = InvocationStatus::kDone;
    log("COMPLETE", &done.request, fn, c.id(), {});
    if (def_.is_terminal(fn)) {
      log("END", &done.request, fn, c.id(),
          "output=" + digest(done.output));
      if (hooks_.on_terminal) hooks_.on_terminal(done.request, fn, done.output);
    }
  }
  dispatch_pending(fn);
}

std::optional<ScaleDecision> NodeEngine::handle_block_signal(const BlockSignal& signal) {
  ++counters_.block_signals;
  if (!config_.pressure_aware || !(signal.pressure > 0)) {
    ++counters_.ignored_signals;
    return std::nullopt;
  }
  Container* c = container(signal.container);
  if (!c) return std::nullopt;
  Nanos until = signal.at + from_seconds(signal.pressure);
  c->block_slot(signal.slot, until);
  log("BLOCK", nullptr, signal.function, signal.container,
      "pressure=" + format_double(signal.pressure));
  auto& window = block_window_[signal.function];
  window = std::max(window, until);
  last_signal_[signal.function] = signal;
  std::weak_ptr<bool> alive = alive_;
  loop_.schedule_at(until, [this, alive, fn = signal.function] {
    if (auto a = alive.lock(); a && *a) dispatch_pending(fn);
  });
  return maybe_scale(signal.function, signal);
}

std::optional<ScaleDecision> NodeEngine::maybe_scale(const FunctionName& fn,
                                                     const std::optional<BlockSignal>& signal) {
  if (pending(fn) == 0 || cold_start_in_flight_.count(fn)) return std::nullopt;
  Nanos now = loop_.now();
  ScaleDecision d;
  d.function = fn;
  d.at = now;
  d.queue_depth = pending(fn);
  auto window = block_window_.find(fn);
  if (config_.pressure_aware && window != block_window_.end() && now < window->second) {
    d.reason = ScaleReason::kPressure;
    d.signal = signal ? signal : std::optional<BlockSignal>(last_signal_.at(fn));
  } else if (config_.autoscale) {
    d.reason = ScaleReason::kNoIdleFlu;
  } else {
    return std::nullopt;
  }
  if (live_containers(fn) >= static_cast<std::size_t>(config_.max_containers_per_function))
    return std::nullopt;
  if (!fits_on_node(def_.function(fn))) return std::nullopt;

  Container& c = create_container(fn, false);
  d.container = c.id();
  cold_start_in_flight_.insert(fn);
  ++counters_.cold_starts;
  ++(d.reason == ScaleReason::kPressure ? counters_.scale_pressure : counters_.scale_no_idle);
  decisions_.push_back(d);
  log("SCALE", nullptr, fn, c.id(),
      std::string("reason=") + to_string(d.reason) + " queue=" + std::to_string(d.queue_depth));

  std::weak_ptr<bool> alive = alive_;
  loop_.schedule_after(config_.cold_start, [this, alive, fn, id = c.id()] {
    auto a = alive.lock();
    if (!a || !*a) return;
    for (auto& s : pool_[fn])
      if (s.container->id() == id) s.warm = true;
    cold_start_in_flight_.erase(fn);
    log("WARM", nullptr, fn, id, {});
    dispatch_pending(fn);
    maybe_scale(fn, std::nullopt);
  });
  return d;
}

std::vector<ContainerId> NodeEngine::keepalive_sweep(Nanos now) {
  std::vector<ContainerId> out;
  for (auto& [fn, slots] : pool_) {
    for (auto& s : slots) {
      Container& c = *s.container;
      if (!s.warm || !is_recyclable(c.state(), now)) continue;
      c.mark_recycled(now);
      for (auto& l : lifetimes_)
        if (l.id == c.id()) l.recycled_at = now;
      ++counters_.recycled;
      log("RECYCLE", nullptr, fn, c.id(), {});
      out.push_back(c.id());
    }
  }
  return out;
}

RedoPlan NodeEngine::plan_redo(const RequestId& request, const FaultReport& failure) {
  RedoPlan plan;
  plan.request = request;
  plan.failed_function = failure.function;
  plan.container = failure.container;
  if (failure.kind == FaultReport::Kind::kFlu) {
    if (!lineage_.count({request, failure.function}))
      throw Error(Errc::kUnrecoverable, "inputs of '" + failure.function + "' are gone");
    plan.reexecute.push_back(failure.function);
    return plan;
  }
  if (!failure.connector) {
    plan.retry = true;
    return plan;
  }
  ConnectorHandle& h = *failure.connector;
  if (h.end_acked) return plan;
  if (!h.retention_lost && !h.retained.empty()) {
    plan.frontier.emplace_back(failure.connector, dataplane_.last_checkpoint(h));
    return plan;
  }
  if (failure.function == kGatewaySource || !lineage_.count({request, failure.function}))
    throw Error(Errc::kUnrecoverable,
                "flow from '" + failure.function + "' lost with no re-executable source");
  plan.reexecute.push_back(failure.function);
  plan.regenerate.insert(h.flow.flow.value);
  return plan;
}

void NodeEngine::execute_redo(const RedoPlan& plan) {
  if (plan.empty()) return;
  ++counters_.redos;
  Container* holder = container(plan.container);
  if (plan.retry) {
    log("REDO", &plan.request, plan.failed_function, plan.container, "retry");
    if (holder) holder->resume_pump();
    return;
  }
  RedoPlan escalated;
  for (const auto& [conn, cp] : plan.frontier) {
    try {
      dataplane_.replay_from(*conn, cp);
      log("REDO", &plan.request, plan.failed_function, plan.container,
          "replay from_seq=" + std::to_string(cp.resume_seq()));
      if (holder) holder->resume_pump();
    } catch (const Error& e) {
      if (e.code() == Errc::kNetworkUnreachable) {
        std::weak_ptr<bool> alive = alive_;
        loop_.schedule_after(config_.redo_delay, [this, alive, plan] {
          if (auto a = alive.lock(); a && *a) execute_redo(plan);
        });
        return;
      }
      if (e.code() != Errc::kRetentionLost) throw;
      if (!lineage_.count({plan.request, plan.failed_function})) {
        fail_request(plan.request, e.what());
        return;
      }
      escalated.reexecute = {plan.failed_function};
      escalated.regenerate.insert(conn->flow.flow.value);
    }
  }
  auto regenerate = plan.regenerate;
  auto reexecute = plan.reexecute;
  if (!escalated.reexecute.empty()) {
    reexecute = escalated.reexecute;
    regenerate.insert(escalated.regenerate.begin(), escalated.regenerate.end());
  }
  for (const auto& fn : reexecute) {
    auto lin = lineage_.find({plan.request, fn});
    if (lin == lineage_.end()) {
      fail_request(plan.request, "inputs of '" + fn + "' are gone");
      return;
    }
    if (!regenerate.empty())
      for (Container* c : containers(fn))
        for (auto flow : regenerate) c->abandon_flow(FlowKey{plan.request, FlowId{flow}});
    Invocation inv{plan.request, fn, lin->second, {}};
    inv.options.suppress = plan.suppress;
    if (!regenerate.empty()) inv.options.only_flows = regenerate;
    auto& st = table_[plan.request][fn];
    st.status = InvocationStatus::kReady;
    log("REDO", &plan.request, fn, plan.container,
        "reexecute flows=" + std::to_string(regenerate.size()));
    pending_[fn].push_front(std::move(inv));
    dispatch_pending(fn);
    maybe_scale(fn, std::nullopt);
  }
}

void NodeEngine::on_transfer_fault(Container& c, const TransferFault& fault) {
  FaultReport r;
  r.kind = FaultReport::Kind::kTransfer;
  r.request = fault.request;
  r.function = c.spec().name;
  r.data = fault.data;
  r.destination = fault.destination;
  r.connector = fault.connector;
  r.container = c.id();
  log("FAULT", &fault.request, r.function, c.id(),
      "transfer data=" + fault.data + " dest=" + fault.destination);
  try {
    RedoPlan plan = plan_redo(fault.request, r);
    std::weak_ptr<bool> alive = alive_;
    loop_.schedule_after(config_.redo_delay, [this, alive, plan] {
      if (auto a = alive.lock(); a && *a) execute_redo(plan);
    });
  } catch (const Error& e) {
    fail_request(fault.request, e.what());
  }
}

void NodeEngine::fail_request(const RequestId& request, const std::string& reason) {
  ++counters_.failures;
  for (auto& [fn, st] : table_[request])
    if (st.status != InvocationStatus::kDone) st.status = InvocationStatus::kFailed;
  log("FAILED", &request, {}, 0, reason);
  if (hooks_.on_request_failed) hooks_.on_request_failed(request, reason);
}

void NodeEngine::on_request_complete(const RequestId& request) {
  sink_.release_request(request);
  for (auto it = lineage_.lower_bound({request, FunctionName{}});
       it != lineage_.end() && it->first.first == request;)
    it = lineage_.erase(it);
  std::weak_ptr<bool> alive = alive_;
  loop_.schedule_after(config_.request_gc_after, [this, alive, request] {
    auto a = alive.lock();
    if (!a || !*a) return;
    table_.erase(request);
    sink_.forget_request(request);
  });
}

}  // namespace flowrt
