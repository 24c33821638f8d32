// SPDX-License-Identifier: Apache-2.0
#include "flowrt/harness/baseline.hpp"

#include <algorithm>
#include <deque>
#include <memory>

#include "flowrt/common/error.hpp"
#include "flowrt/harness/load_driver.hpp"
#include "flowrt/wire/frame.hpp"
#include "flowrt/wire/token_bucket.hpp"
#include "flowrt/workflow/transforms.hpp"
#include "flowrt/workflow/validate.hpp"

namespace flowrt {

namespace {

struct Worker {
  ContainerId id = 0;
  FunctionName function;
  NodeId node;
  ResourceSpec resources;
  TokenBucket bucket;
  bool warm = false;
  bool busy = false;
  bool recycled = false;
  Nanos last_active{0};

  Worker(ContainerId i, FunctionName fn, NodeId n, ResourceSpec r)
      : id(i),
        function(std::move(fn)),
        node(std::move(n)),
        resources(r),
        bucket(r.bandwidth_bps(), kChunkSize * 8) {}
};

struct Task {
  RequestId request;
  FunctionName function;
};

class ControlFlowRun {
 public:
  ControlFlowRun(const ClusterConfig& config, const WorkflowDefinition& def,
                 const Placement& placement, bool event_log)
      : config_(config),
        rt_(config.runtime),
        def_(def),
        placement_(placement),
        loop_(config.clock == ClockMode::kReal),
        log_(event_log) {
    config_.validate();
    for (const auto& f : validate(def_).findings)
      if (is_structural(f.kind)) throw Error(Errc::kSemantic, f.message);
    for (const auto& n : config_.nodes) nodes_[n.id] = n;
    for (const auto& fn : def_.functions) {
      if (!nodes_.count(placement_.node_of(fn.name)))
        throw Error(Errc::kPlacement, "function '" + fn.name + "' placed on unknown node");
      for (int i = 0; i < rt_.prewarm_per_function; ++i)
        if (fits(fn)) create(fn.name, true);
    }
  }

  EventLoop& loop() { return loop_; }
  EventLog& log() { return log_; }
  std::size_t outstanding() const { return outstanding_; }
  std::function<void(const RequestRecord&)> on_finish;

  void start() {
    running_ = true;
    auto sweep = std::make_shared<std::function<void()>>();
    *sweep = [this, sweep] {
      if (!running_) return;
      keepalive_sweep();
      loop_.schedule_after(rt_.keepalive_sweep_interval, *sweep);
    };
    loop_.schedule_after(rt_.keepalive_sweep_interval, *sweep);
  }
  void stop() { running_ = false; }

  void submit(std::uint64_t index, const RequestId& id, const Payload& input) {
    RequestRecord rec;
    rec.index = index;
    rec.id = id;
    rec.submit = loop_.now();
    records_.emplace(id, std::move(rec));
    order_.push_back(id);
    ++outstanding_;
    inputs_[{id, def_.entry}][def_.entry_input()] = input;
    trigger(id, def_.entry);
  }

  std::vector<RequestRecord> records_in_order() const {
    std::vector<RequestRecord> out;
    for (const auto& id : order_) out.push_back(records_.at(id));
    return out;
  }

  double store_byte_seconds() {
    account();
    return static_cast<double>(byte_nanos_) / 1e9;
  }
  std::uint64_t cold_starts() const { return cold_starts_; }
  const std::vector<ContainerLifetime>& lifetimes() const { return lifetimes_; }
  const std::vector<ScaleDecision>& decisions() const { return decisions_; }

 private:
  // The controller handles one trigger at a time per request.
  void trigger(const RequestId& r, const FunctionName& fn) {
    Nanos& free_at = controller_free_[r];
    Nanos at = std::max(loop_.now(), free_at) + rt_.trigger_overhead;
    free_at = at;
    loop_.schedule_at(at, [this, r, fn] {
      log("TRIGGER", &r, fn, 0, {});
      pending_[fn].push_back(Task{r, fn});
      dispatch(fn);
      maybe_scale(fn);
    });
  }

  bool fits(const FunctionSpec& spec) const {
    const NodeId& node = placement_.node_of(spec.name);
    std::int64_t memory = 0;
    double cores = 0;
    for (const auto& [fn, ws] : pool_)
      for (const auto& w : ws)
        if (!w->recycled && w->node == node) {
          memory += w->resources.memory_mb;
          cores += w->resources.cpu_cores;
        }
    auto r = spec.resources();
    const NodeSpec& n = nodes_.at(node);
    return memory + r.memory_mb <= n.memory_mb && cores + r.cpu_cores <= n.cores + 1e-9;
  }

  Worker& create(const FunctionName& fn, bool warm) {
    const FunctionSpec& spec = def_.function(fn);
    auto w = std::make_unique<Worker>(next_id_++, fn, placement_.node_of(fn), spec.resources());
    w->warm = warm;
    w->last_active = loop_.now();
    lifetimes_.push_back(
        ContainerLifetime{w->id, fn, w->node, spec.memory_mb, loop_.now(), std::nullopt});
    log("CREATED", nullptr, fn, w->id, warm ? "warm" : "cold");
    pool_[fn].push_back(std::move(w));
    return *pool_[fn].back();
  }

  std::size_t live(const FunctionName& fn) const {
    auto it = pool_.find(fn);
    if (it == pool_.end()) return 0;
    return static_cast<std::size_t>(std::count_if(
        it->second.begin(), it->second.end(), [](const auto& w) { return !w->recycled; }));
  }

  void maybe_scale(const FunctionName& fn) {
    if (!rt_.autoscale || pending_[fn].empty() || cold_in_flight_.count(fn)) return;
    if (live(fn) >= static_cast<std::size_t>(rt_.max_containers_per_function)) return;
    if (!fits(def_.function(fn))) return;
    Worker& w = create(fn, false);
    cold_in_flight_.insert(fn);
    ++cold_starts_;
    decisions_.push_back(ScaleDecision{fn, ScaleReason::kNoIdleFlu, std::nullopt,
                                       pending_[fn].size(), w.id, loop_.now()});
    log("SCALE", nullptr, fn, w.id, "reason=NO_IDLE_FLU queue=" + std::to_string(pending_[fn].size()));
    loop_.schedule_after(rt_.cold_start, [this, fn, id = w.id] {
      for (auto& x : pool_[fn])
        if (x->id == id) x->warm = true;
      cold_in_flight_.erase(fn);
      log("WARM", nullptr, fn, id, {});
      dispatch(fn);
      maybe_scale(fn);
    });
  }

  Worker* pick_idle(const FunctionName& fn) {
    Worker* best = nullptr;
    for (auto& w : pool_[fn]) {
      if (!w->warm || w->busy || w->recycled) continue;
      if (!best || w->last_active < best->last_active) best = w.get();
    }
    return best;
  }

  void dispatch(const FunctionName& fn) {
    auto& q = pending_[fn];
    while (!q.empty()) {
      Worker* w = pick_idle(fn);
      if (!w) return;
      Task t = q.front();
      q.pop_front();
      run(*w, t);
    }
  }

  // Transfer time of `bytes` through the worker's bucket, in chunk-sized
  // acquires queued back to back.
  Nanos transfer(Worker& w, std::uint64_t bytes) {
    double scaled = static_cast<double>(bytes) * rt_.store_contention;
    auto total = static_cast<std::uint64_t>(scaled);
    Nanos wait{0};
    for (std::uint64_t off = 0; off < total; off += kChunkSize)
      wait = w.bucket.acquire(std::min<std::uint64_t>(kChunkSize, total - off) * 8, loop_.now());
    return wait;
  }

  void run(Worker& w, const Task& t) {
    w.busy = true;
    w.last_active = loop_.now();
    const FunctionSpec& spec = def_.function(t.function);
    InputBundle inputs = std::move(inputs_[{t.request, t.function}]);
    inputs_.erase({t.request, t.function});
    log("DISPATCH", &t.request, t.function, w.id, {});
    if (t.function == def_.entry) {
      auto it = records_.find(t.request);
      if (it != records_.end() && !it->second.start) it->second.start = loop_.now();
    }
    // The entry receives its input with the trigger; everything else loads
    // from the store.
    Nanos get = t.function == def_.entry ? Nanos{0} : transfer(w, bundle_size(inputs));
    Nanos compute = spec.compute.duration(bundle_size(inputs), w.resources.cpu_cores);
    loop_.schedule_after(get + compute, [this, &w, t, inputs] {
      const FunctionSpec& spec = def_.function(t.function);
      Payload out = apply_transform(spec, inputs);
      auto stored = route(t.request, spec, out);
      Nanos put = transfer(w, stored);
      loop_.schedule_after(put, [this, &w, t, out] { finished(w, t, out); });
    });
  }

  // Stores the outputs for every selected destination; returns the bytes
  // written. Replicated payloads are stored once.
  std::uint64_t route(const RequestId& r, const FunctionSpec& spec, const Payload& out) {
    std::uint64_t written = 0;
    auto& routed = routed_[{r, spec.name}];
    for (const FlowEdge* e : def_.outgoing(spec.name)) {
      std::vector<std::size_t> picked;
      if (e->conditional) {
        auto label = select_label(spec.switch_selector.value_or(SwitchSelector{}), e->labels, out);
        for (std::size_t i = 0; i < e->labels.size(); ++i)
          if (e->labels[i] == label) picked.push_back(i);
      } else {
        for (std::size_t i = 0; i < e->destinations.size(); ++i) picked.push_back(i);
      }
      bool partitioned = spec.compute.transform == TransformKind::kSplit;
      bool stored_once = false;
      for (auto i : picked) {
        Payload p = route_payload(spec, out, i, e->destinations.size());
        inputs_[{r, e->destinations[i]}][e->data_name] = p;
        routed.push_back(e->destinations[i]);
        if (partitioned || !stored_once) {
          written += p.size();
          stored_once = true;
        }
      }
    }
    account();
    store_bytes_[r] += written;
    resident_ += written;
    return written;
  }

  void finished(Worker& w, const Task& t, const Payload& out) {
    w.busy = false;
    w.last_active = loop_.now();
    log("COMPLETE", &t.request, t.function, w.id, {});
    auto rec = records_.find(t.request);
    if (def_.is_terminal(t.function) && rec != records_.end()) {
      log("END", &t.request, t.function, w.id, "output=" + std::to_string(out.size()));
      rec->second.outputs[t.function] = out;
      bool all = std::all_of(def_.terminals.begin(), def_.terminals.end(),
                             [&](const auto& x) { return rec->second.outputs.count(x) > 0; });
      if (all) complete(rec->second);
    }
    auto routed = std::move(routed_[{t.request, t.function}]);
    routed_.erase({t.request, t.function});
    for (const auto& dest : routed) {
      auto key = std::make_pair(t.request, dest);
      if (triggered_.count(key)) continue;
      const auto& staged = inputs_[key];
      const auto& declared = def_.function(dest).declared_inputs;
      bool ready = std::all_of(declared.begin(), declared.end(),
                               [&](const auto& d) { return staged.count(d) > 0; });
      if (!ready) continue;
      triggered_.insert(key);
      trigger(t.request, dest);
    }
    dispatch(t.function);
  }

  void complete(RequestRecord& rec) {
    rec.end = loop_.now();
    --outstanding_;
    account();
    resident_ -= store_bytes_[rec.id];
    store_bytes_.erase(rec.id);
    controller_free_.erase(rec.id);
    for (auto it = triggered_.lower_bound({rec.id, FunctionName{}});
         it != triggered_.end() && it->first == rec.id;)
      it = triggered_.erase(it);
    for (auto it = inputs_.lower_bound({rec.id, FunctionName{}});
         it != inputs_.end() && it->first.first == rec.id;)
      it = inputs_.erase(it);
    if (on_finish) on_finish(rec);
  }

  void keepalive_sweep() {
    Nanos now = loop_.now();
    for (auto& [fn, ws] : pool_)
      for (auto& w : ws) {
        if (!w->warm || w->busy || w->recycled || now - w->last_active < rt_.keepalive) continue;
        w->recycled = true;
        for (auto& l : lifetimes_)
          if (l.id == w->id) l.recycled_at = now;
        log("RECYCLE", nullptr, fn, w->id, {});
      }
  }

  void account() {
    Nanos now = loop_.now();
    byte_nanos_ += static_cast<Int128>(resident_) * (now - last_account_).count();
    last_account_ = now;
  }

  void log(const std::string& kind, const RequestId* r, const FunctionName& fn, ContainerId c,
           std::string detail) {
    if (!log_.enabled()) return;
    NodeId node = def_.find(fn) ? placement_.node_of(fn) : NodeId{};
    log_.append(EngineEvent{loop_.now(), node, kind, r ? r->hex() : std::string(), fn, c,
                            std::move(detail)});
  }

  ClusterConfig config_;
  const RuntimeConfig& rt_;
  const WorkflowDefinition& def_;
  const Placement& placement_;
  EventLoop loop_;
  EventLog log_;
  bool running_ = false;
  std::map<NodeId, NodeSpec> nodes_;
  ContainerId next_id_ = 1;

  std::map<FunctionName, std::vector<std::unique_ptr<Worker>>> pool_;
  std::map<FunctionName, std::deque<Task>> pending_;
  std::set<FunctionName> cold_in_flight_;
  std::vector<ContainerLifetime> lifetimes_;
  std::vector<ScaleDecision> decisions_;
  std::uint64_t cold_starts_ = 0;

  std::map<RequestId, RequestRecord> records_;
  std::vector<RequestId> order_;
  std::size_t outstanding_ = 0;
  std::map<RequestId, Nanos> controller_free_;
  std::map<std::pair<RequestId, FunctionName>, InputBundle> inputs_;
  std::map<std::pair<RequestId, FunctionName>, std::vector<FunctionName>> routed_;
  std::set<std::pair<RequestId, FunctionName>> triggered_;

  std::map<RequestId, std::uint64_t> store_bytes_;
  std::uint64_t resident_ = 0;
  Int128 byte_nanos_ = 0;
  Nanos last_account_{0};
};

}  // namespace

RunResult run_controlflow(const ClusterConfig& config, const WorkloadSpec& workload,
                          const Placement& placement, const RunOptions& options) {
  ControlFlowRun run(config, workload.workflow, placement, options.event_log);
  LoadDriver driver(run.loop(), workload, [&](std::uint64_t index) {
    Payload input(generate_input(workload.seed, index, workload.input_size));
    run.submit(index, request_id_for(workload.seed, index), input);
  });
  run.on_finish = [&](const RequestRecord& rec) { driver.finished(rec.index); };
  run.start();
  driver.start();
  Nanos stopped = drive_run(run.loop(), workload, [&] { return run.outstanding(); });
  run.stop();

  RunResult result;
  RunMetrics& m = result.metrics;
  m.mode = "controlflow";
  result.output_mismatches =
      finalize_requests(m, run.records_in_order(), workload, stopped, options.verify_outputs);
  result.lifetimes = run.lifetimes();
  result.decisions = run.decisions();
  result.sinks.byte_seconds = run.store_byte_seconds();
  result.engines.cold_starts = run.cold_starts();
  result.engines.scale_no_idle = run.decisions().size();
  if (options.event_log) result.events = run.log().events();

  m.container_gb_seconds = gb_seconds(result.lifetimes, stopped);
  m.sink_byte_seconds = result.sinks.byte_seconds;
  m.cold_starts = run.cold_starts();
  m.scale_decisions = result.decisions.size();
  m.peak_containers = peak_containers(result.lifetimes, stopped);
  return result;
}

}  // namespace flowrt
