// SPDX-License-Identifier: Apache-2.0
#include "flowrt/harness/config_file.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "flowrt/common/error.hpp"
#include "flowrt/common/units.hpp"

namespace flowrt {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kConfig, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Nanos duration_field(const json& j, const char* key, Nanos fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (v.is_number()) return from_seconds(v.get<double>());
  auto d = parse_duration(v.get<std::string>());
  if (!d) throw Error(Errc::kConfig, std::string("bad duration for '") + key + "'");
  return *d;
}

void read_runtime(const json& j, RuntimeConfig& rt) {
  rt.alpha = j.value("alpha", rt.alpha);
  rt.ewma_beta = j.value("ewma_beta", rt.ewma_beta);
  rt.pressure_aware = j.value("pressure_aware", rt.pressure_aware);
  rt.autoscale = j.value("autoscale", rt.autoscale);
  rt.prewarm_per_function = j.value("prewarm_per_function", rt.prewarm_per_function);
  rt.max_containers_per_function =
      j.value("max_containers_per_function", rt.max_containers_per_function);
  rt.flu_slots = j.value("flu_slots", rt.flu_slots);
  rt.cold_start = duration_field(j, "cold_start", rt.cold_start);
  rt.keepalive = duration_field(j, "keepalive", rt.keepalive);
  rt.keepalive_sweep_interval =
      duration_field(j, "keepalive_sweep_interval", rt.keepalive_sweep_interval);
  rt.request_gc_after = duration_field(j, "request_gc_after", rt.request_gc_after);
  rt.redo_delay = duration_field(j, "redo_delay", rt.redo_delay);
  rt.sink_ttl = duration_field(j, "sink_ttl", rt.sink_ttl);
  rt.sink_sweep_interval = duration_field(j, "sink_sweep_interval", rt.sink_sweep_interval);
  rt.checkpoint_every_chunks = j.value("checkpoint_every_chunks", rt.checkpoint_every_chunks);
  rt.checkpoint_every = duration_field(j, "checkpoint_every", rt.checkpoint_every);
  rt.trigger_overhead = duration_field(j, "trigger_overhead", rt.trigger_overhead);
  rt.store_contention = j.value("store_contention", rt.store_contention);
  rt.spill_root = j.value("spill_root", rt.spill_root);
  if (j.contains("release_policy")) {
    auto p = j.at("release_policy").get<std::string>();
    if (p == "proactive") rt.release_policy = ReleasePolicy::kProactive;
    else if (p == "at_completion") rt.release_policy = ReleasePolicy::kAtRequestCompletion;
    else throw Error(Errc::kConfig, "unknown release_policy '" + p + "'");
  }
}

FaultSpec read_fault(const json& j) {
  FaultSpec f;
  auto kind = j.value("kind", std::string("interrupt"));
  if (kind == "interrupt") f.kind = FaultKind::kTransferInterrupt;
  else if (kind == "flu") f.kind = FaultKind::kFluFault;
  else throw Error(Errc::kConfig, "unknown fault kind '" + kind + "'");
  f.request_index = j.value("request", std::uint64_t{0});
  f.source = j.value("source", std::string());
  f.data = j.value("data", std::string());
  f.destination = j.value("destination", std::string());
  f.chunk_index = j.value("chunk", std::uint64_t{0});
  f.retention_lost = j.value("retention_lost", false);
  f.at_fraction = j.value("at", 0.5);
  return f;
}

}  // namespace

ClusterConfig parse_cluster_config(const std::string& text) {
  ClusterConfig cfg;
  try {
    json j = json::parse(text);
    if (!j.is_object() || !j.contains("nodes") || !j.at("nodes").is_array())
      throw Error(Errc::kConfig, "cluster document needs a \"nodes\" array");
    for (const auto& n : j.at("nodes")) {
      NodeSpec spec;
      spec.id = n.at("id").get<std::string>();
      spec.cores = n.value("cores", spec.cores);
      spec.memory_mb = n.value("memory_mb", spec.memory_mb);
      cfg.nodes.push_back(spec);
    }
    auto clock = j.value("clock", std::string("virtual"));
    if (clock == "virtual") cfg.clock = ClockMode::kVirtual;
    else if (clock == "real") cfg.clock = ClockMode::kReal;
    else throw Error(Errc::kConfig, "unknown clock '" + clock + "'");
    if (j.contains("runtime")) read_runtime(j.at("runtime"), cfg.runtime);
    if (j.contains("faults"))
      for (const auto& f : j.at("faults")) cfg.faults.push_back(read_fault(f));
  } catch (const json::exception& e) {
    throw Error(Errc::kConfig, std::string("bad cluster document: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ClusterConfig load_cluster_config(const std::string& path) {
  return parse_cluster_config(read_file(path));
}

RunMetrics read_summary_json(const std::string& path) {
  RunMetrics m;
  try {
    json j = json::parse(read_file(path));
    m.mode = j.at("mode").get<std::string>();
    m.workflow = j.at("workflow").get<std::string>();
    m.pattern = j.at("pattern").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.input_size = j.at("input_size").get<std::uint64_t>();
    m.duration_s = j.at("duration_s").get<double>();
    m.finished_at_s = j.value("finished_at_s", 0.0);
    m.submitted = j.at("submitted").get<std::size_t>();
    m.completed = j.at("completed").get<std::size_t>();
    m.timeouts = j.at("timeouts").get<std::size_t>();
    m.failed = j.at("failed").get<std::size_t>();
    const auto& lat = j.at("latency_ms");
    m.mean_ms = lat.at("mean").get<double>();
    m.p50_ms = lat.at("p50").get<double>();
    m.p95_ms = lat.at("p95").get<double>();
    m.p99_ms = lat.at("p99").get<double>();
    m.throughput_rpm = j.at("throughput_rpm").get<double>();
    m.container_gb_seconds = j.at("container_gb_seconds").get<double>();
    m.sink_byte_seconds = j.at("sink_byte_seconds").get<double>();
    m.cold_starts = j.value("cold_starts", std::uint64_t{0});
    m.scale_decisions = j.value("scale_decisions", std::uint64_t{0});
    m.pressure_scale_decisions = j.value("pressure_scale_decisions", std::uint64_t{0});
    m.spills = j.value("spills", std::uint64_t{0});
    m.redos = j.value("redos", std::uint64_t{0});
    m.duplicate_deliveries = j.value("duplicate_deliveries", std::uint64_t{0});
    m.peak_containers = j.value("peak_containers", std::uint64_t{0});
  } catch (const json::exception& e) {
    throw Error(Errc::kConfig, "bad summary '" + path + "': " + e.what());
  }
  return m;
}

}  // namespace flowrt
