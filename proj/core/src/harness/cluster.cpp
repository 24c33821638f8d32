// SPDX-License-Identifier: Apache-2.0
#include "flowrt/harness/cluster.hpp"

#include <algorithm>
#include <atomic>

#include <unistd.h>

#include "flowrt/common/error.hpp"
#include "flowrt/harness/load_driver.hpp"
#include "flowrt/workflow/transforms.hpp"
#include "flowrt/workflow/validate.hpp"

namespace flowrt {

std::filesystem::path make_temp_dir(const std::string& prefix) {
  static std::atomic<std::uint64_t> counter{0};
  auto base = std::filesystem::temp_directory_path();
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto p = base / (prefix + "-" + std::to_string(::getpid()) + "-" +
                     std::to_string(counter.fetch_add(1)));
    if (std::filesystem::create_directories(p)) return p;
  }
  throw Error(Errc::kSpillIo, "cannot create a temporary directory under " + base.string());
}

DataflowCluster::DataflowCluster(ClusterConfig config, WorkflowDefinition def,
                                 Placement placement, bool event_log)
    : config_(std::move(config)),
      def_(std::move(def)),
      placement_(std::move(placement)),
      loop_(config_.clock == ClockMode::kReal),
      log_(event_log) {
  config_.validate();
  for (const auto& f : validate(def_).findings)
    if (is_structural(f.kind)) throw Error(Errc::kSemantic, f.message);
  for (const auto& fn : def_.functions)
    if (!config_.has_node(placement_.node_of(fn.name)))
      throw Error(Errc::kPlacement, "function '" + fn.name + "' placed on unknown node");

  if (config_.runtime.spill_root.empty()) {
    spill_root_ = make_temp_dir("flowrt-spill");
    owns_spill_root_ = true;
  } else {
    spill_root_ = config_.runtime.spill_root;
  }

  CheckpointPolicy cp{config_.runtime.checkpoint_every_chunks, config_.runtime.checkpoint_every};
  dataplane_ = std::make_unique<DataPlane>(loop_, cp);
  dataplane_->set_interrupt_hook(
      [this](ConnectorHandle& h, const FlowChunk& c) { return interrupt(h, c); });
  for (const auto& e : expand_edges(def_, placement_)) edges_.emplace(e.flow_id(), e);

  for (const auto& node : config_.nodes) {
    SinkOptions so;
    so.ttl = config_.runtime.sink_ttl;
    so.spill_root = spill_root_ / node.id;
    auto graph = project_local_graph(def_, placement_, config_, node.id);
    auto sink = std::make_unique<DataSink>(node.id, loop_, so);
    sink->configure(def_, graph);
    dataplane_->attach_sink(node.id, sink.get());

    EngineHooks hooks;
    hooks.on_terminal = [this](const RequestId& r, const FunctionName& fn, const Payload& p) {
      on_terminal(r, fn, p);
    };
    hooks.on_request_failed = [this](const RequestId& r, const std::string& why) {
      on_failed(r, why);
    };
    hooks.on_dispatch = [this](const RequestId& r, const FunctionName& fn, Nanos at) {
      if (fn != def_.entry) return;
      auto it = records_.find(r);
      if (it != records_.end() && !it->second.start) it->second.start = at;
    };
    hooks.flu_fault = [this](const RequestId& r, const FunctionName& fn) {
      return flu_fault(r, fn);
    };
    auto engine = std::make_unique<NodeEngine>(node, def_, placement_, std::move(graph), loop_,
                                               *dataplane_, *sink, config_.runtime, log_, ids_,
                                               std::move(hooks));
    sinks_.emplace(node.id, std::move(sink));
    engines_.emplace(node.id, std::move(engine));
  }
}

DataflowCluster::~DataflowCluster() {
  engines_.clear();
  sinks_.clear();
  if (owns_spill_root_) {
    std::error_code ec;
    std::filesystem::remove_all(spill_root_, ec);
  }
}

void DataflowCluster::start() {
  for (auto& [node, e] : engines_) e->start();
}

void DataflowCluster::stop() {
  for (auto& [node, e] : engines_) e->stop();
}

NodeEngine& DataflowCluster::engine(const NodeId& node) {
  auto it = engines_.find(node);
  if (it == engines_.end()) throw Error(Errc::kUnknownNode, "no node '" + node + "'");
  return *it->second;
}

DataSink& DataflowCluster::sink(const NodeId& node) {
  auto it = sinks_.find(node);
  if (it == sinks_.end()) throw Error(Errc::kUnknownNode, "no node '" + node + "'");
  return *it->second;
}

void DataflowCluster::submit(std::uint64_t index, const RequestId& id, const Payload& input) {
  RequestRecord rec;
  rec.index = index;
  rec.id = id;
  rec.submit = loop_.now();
  if (!records_.emplace(id, std::move(rec)).second)
    throw Error(Errc::kInvalidArgument, "request " + id.hex() + " submitted twice");
  by_index_[index] = id;
  ++outstanding_;
  dataplane_->inject(placement_.node_of(def_.entry), id, def_.entry, def_.entry_input(), input);
}

std::vector<RequestRecord> DataflowCluster::records_in_order() const {
  std::vector<RequestRecord> out;
  for (const auto& [index, id] : by_index_) out.push_back(records_.at(id));
  return out;
}

void DataflowCluster::on_terminal(const RequestId& r, const FunctionName& fn, const Payload& out) {
  auto it = records_.find(r);
  if (it == records_.end() || it->second.end || it->second.failed) return;
  RequestRecord& rec = it->second;
  rec.outputs[fn] = out;
  for (const auto& t : def_.terminals)
    if (!rec.outputs.count(t)) return;
  rec.end = loop_.now();
  finish(rec);
}

void DataflowCluster::on_failed(const RequestId& r, const std::string& reason) {
  auto it = records_.find(r);
  if (it == records_.end() || it->second.end || it->second.failed) return;
  it->second.failed = true;
  it->second.failure = reason;
  it->second.end = loop_.now();
  finish(it->second);
}

void DataflowCluster::finish(RequestRecord& rec) {
  --outstanding_;
  RequestId id = rec.id;
  for (auto& [node, e] : engines_) e->on_request_complete(id);
  loop_.schedule_after(config_.runtime.request_gc_after,
                       [this, id] { dataplane_->forget_request(id); });
  if (finish_) finish_(rec);
}

namespace {

bool matches(const std::string& pattern, const std::string& value) {
  return pattern.empty() || pattern == value;
}

}  // namespace

bool DataflowCluster::interrupt(ConnectorHandle& h, const FlowChunk& chunk) {
  auto edge = edges_.find(h.flow.flow);
  if (edge == edges_.end()) return false;
  for (std::size_t i = 0; i < config_.faults.size(); ++i) {
    const FaultSpec& f = config_.faults[i];
    if (f.kind != FaultKind::kTransferInterrupt || fired_faults_.count(i)) continue;
    auto id = by_index_.find(f.request_index);
    if (id == by_index_.end() || id->second != h.flow.request) continue;
    if (!matches(f.source, edge->second.source) || !matches(f.data, edge->second.data_name) ||
        !matches(f.destination, edge->second.destination))
      continue;
    std::uint64_t last = h.retained.empty() ? 0 : h.retained.size() - 1;
    if (chunk.seq != std::min<std::uint64_t>(f.chunk_index, last)) continue;
    fired_faults_.insert(i);
    if (f.retention_lost) dataplane_->purge_retention(h);
    return true;
  }
  return false;
}

std::optional<double> DataflowCluster::flu_fault(const RequestId& r, const FunctionName& fn) {
  for (std::size_t i = 0; i < config_.faults.size(); ++i) {
    const FaultSpec& f = config_.faults[i];
    if (f.kind != FaultKind::kFluFault || fired_faults_.count(i)) continue;
    auto id = by_index_.find(f.request_index);
    if (id == by_index_.end() || id->second != r || !matches(f.source, fn)) continue;
    fired_faults_.insert(i);
    return f.at_fraction;
  }
  return std::nullopt;
}

SinkStats DataflowCluster::sink_stats() const {
  SinkStats total;
  for (const auto& [node, s] : sinks_) {
    auto st = s->stats();
    total.resident_bytes += st.resident_bytes;
    total.byte_seconds += st.byte_seconds;
    total.spilled_bytes += st.spilled_bytes;
    total.hits += st.hits;
    total.misses += st.misses;
    total.spills += st.spills;
    total.spill_failures += st.spill_failures;
    total.spill_reloads += st.spill_reloads;
    total.releases += st.releases;
    total.released_bytes += st.released_bytes;
    total.chunks_accepted += st.chunks_accepted;
    total.duplicate_chunks += st.duplicate_chunks;
    total.unknown_flow_chunks += st.unknown_flow_chunks;
    total.duplicate_take_attempts += st.duplicate_take_attempts;
    total.duplicate_deliveries += st.duplicate_deliveries;
  }
  return total;
}

EngineCounters DataflowCluster::engine_counters() const {
  EngineCounters t;
  for (const auto& [node, e] : engines_) {
    const auto& c = e->counters();
    t.dispatches += c.dispatches;
    t.duplicate_ready += c.duplicate_ready;
    t.cold_starts += c.cold_starts;
    t.scale_pressure += c.scale_pressure;
    t.scale_no_idle += c.scale_no_idle;
    t.block_signals += c.block_signals;
    t.ignored_signals += c.ignored_signals;
    t.recycled += c.recycled;
    t.redos += c.redos;
    t.failures += c.failures;
  }
  return t;
}

std::vector<ContainerLifetime> DataflowCluster::lifetimes() const {
  std::vector<ContainerLifetime> out;
  for (const auto& [node, e] : engines_)
    out.insert(out.end(), e->lifetimes().begin(), e->lifetimes().end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

std::vector<ScaleDecision> DataflowCluster::decisions() const {
  std::vector<ScaleDecision> out;
  for (const auto& [node, e] : engines_)
    out.insert(out.end(), e->scale_decisions().begin(), e->scale_decisions().end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.at < b.at; });
  return out;
}

std::uint64_t peak_containers(const std::vector<ContainerLifetime>& lifetimes, Nanos end) {
  std::vector<std::pair<Nanos, int>> deltas;
  for (const auto& l : lifetimes) {
    deltas.emplace_back(l.created_at, 1);
    deltas.emplace_back(l.recycled_at ? std::min(*l.recycled_at, end) : end, -1);
  }
  // Recycles sort before creations at the same instant.
  std::sort(deltas.begin(), deltas.end());
  std::int64_t live = 0, peak = 0;
  for (const auto& [at, d] : deltas) {
    live += d;
    peak = std::max(peak, live);
  }
  return static_cast<std::uint64_t>(peak);
}

RunResult run_dataflow(const ClusterConfig& config, const WorkloadSpec& workload,
                       const Placement& placement, const RunOptions& options) {
  DataflowCluster cluster(config, workload.workflow, placement, options.event_log);
  LoadDriver driver(cluster.loop(), workload, [&](std::uint64_t index) {
    RequestId id = request_id_for(workload.seed, index);
    Payload input(generate_input(workload.seed, index, workload.input_size));
    cluster.submit(index, id, input);
  });
  cluster.on_finish([&](const RequestRecord& rec) { driver.finished(rec.index); });
  cluster.start();
  driver.start();
  Nanos stopped = drive_run(cluster.loop(), workload, [&] { return cluster.outstanding(); });
  cluster.stop();

  RunResult result;
  RunMetrics& m = result.metrics;
  m.mode = "dataflow";
  result.output_mismatches = finalize_requests(m, cluster.records_in_order(), workload, stopped,
                                               options.verify_outputs);

  result.sinks = cluster.sink_stats();
  result.engines = cluster.engine_counters();
  result.dataplane = cluster.dataplane().counters();
  result.lifetimes = cluster.lifetimes();
  result.decisions = cluster.decisions();
  if (options.event_log) result.events = cluster.log().events();

  m.container_gb_seconds = gb_seconds(result.lifetimes, stopped);
  m.sink_byte_seconds = result.sinks.byte_seconds;
  m.cold_starts = result.engines.cold_starts;
  m.scale_decisions = result.decisions.size();
  m.pressure_scale_decisions = result.engines.scale_pressure;
  m.spills = result.sinks.spills;
  m.redos = result.engines.redos;
  m.duplicate_deliveries = result.sinks.duplicate_deliveries;
  m.small_transfers = result.dataplane.small_transfers;
  m.local_connectors = result.dataplane.local_connectors;
  m.remote_connectors = result.dataplane.remote_connectors;
  m.peak_containers = peak_containers(result.lifetimes, stopped);
  return result;
}

}  // namespace flowrt
