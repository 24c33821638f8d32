// SPDX-License-Identifier: Apache-2.0
#include "flowrt/harness/catalog.hpp"

#include <filesystem>

#include "flowrt/common/error.hpp"
#include "flowrt/workflow/parser.hpp"

namespace flowrt {

namespace {

FunctionSpec fn(std::string name, TransformKind t, std::vector<DataName> inputs,
                std::int64_t memory_mb, double cost = 0, double base = 0,
                std::uint64_t mix = 0) {
  FunctionSpec f;
  f.name = std::move(name);
  f.compute.transform = t;
  f.compute.cost_ms_per_mib = cost;
  f.compute.base_cpu_ms = base;
  f.compute.mix_bytes = mix;
  f.declared_inputs = std::move(inputs);
  f.memory_mb = memory_mb;
  return f;
}

FlowEdge edge(std::string src, std::string data, std::vector<FunctionName> dests) {
  FlowEdge e;
  e.source = std::move(src);
  e.data_name = std::move(data);
  e.destinations = std::move(dests);
  return e;
}

}  // namespace

WorkflowDefinition make_wordcount(std::size_t fan, std::int64_t memory_mb) {
  if (fan == 0) throw Error(Errc::kInvalidArgument, "fan must be positive");
  WorkflowDefinition d;
  d.name = "wc";
  d.entry = "start";
  d.terminals = {"merge"};
  d.functions.push_back(fn("start", TransformKind::kSplit, {"input"}, memory_mb, 2.0));
  std::vector<FunctionName> counters;
  std::vector<DataName> partials;
  for (std::size_t i = 0; i < fan; ++i) {
    counters.push_back("count" + std::to_string(i));
    partials.push_back("c" + std::to_string(i));
  }
  for (std::size_t i = 0; i < fan; ++i)
    d.functions.push_back(fn(counters[i], TransformKind::kWordCount, {"part"}, memory_mb, 5.0));
  d.functions.push_back(fn("merge", TransformKind::kSum, partials, memory_mb, 0.0, 1.0));
  d.flows.push_back(edge("start", "part", counters));
  for (std::size_t i = 0; i < fan; ++i) d.flows.push_back(edge(counters[i], partials[i], {"merge"}));
  return d;
}

WorkflowDefinition make_chain(std::size_t n, std::uint64_t size, std::int64_t memory_mb) {
  if (n == 0) throw Error(Errc::kInvalidArgument, "chain length must be positive");
  WorkflowDefinition d;
  d.name = "chain";
  d.entry = "f0";
  d.terminals = {"f" + std::to_string(n - 1)};
  for (std::size_t i = 0; i < n; ++i) {
    auto name = "f" + std::to_string(i);
    auto input = i == 0 ? std::string("input") : "d" + std::to_string(i - 1);
    d.functions.push_back(fn(name, TransformKind::kMix, {input}, memory_mb, 1.0, 5.0, size));
    if (i + 1 < n) d.flows.push_back(edge(name, "d" + std::to_string(i), {"f" + std::to_string(i + 1)}));
  }
  return d;
}

WorkflowDefinition make_switch3(std::uint64_t size, std::int64_t memory_mb) {
  WorkflowDefinition d;
  d.name = "switch3";
  d.entry = "start";
  d.terminals = {"end"};
  d.functions.push_back(fn("start", TransformKind::kMix, {"input"}, memory_mb, 1.0, 5.0, size));
  d.functions.back().switch_selector = SwitchSelector{};
  for (const char* b : {"fa", "fb", "fc"})
    d.functions.push_back(fn(b, TransformKind::kMix, {"img"}, memory_mb, 2.0, 5.0, size));
  d.functions.push_back(fn("out", TransformKind::kChecksum, {"res"}, memory_mb, 1.0, 2.0));
  d.functions.push_back(fn("end", TransformKind::kConcat, {"sum"}, memory_mb, 0.0, 1.0));
  FlowEdge sw = edge("start", "img", {"fa", "fb", "fc"});
  sw.conditional = true;
  sw.labels = {"a", "b", "c"};
  d.flows.push_back(sw);
  for (const char* b : {"fa", "fb", "fc"}) d.flows.push_back(edge(b, "res", {"out"}));
  d.flows.push_back(edge("out", "sum", {"end"}));
  return d;
}

WorkflowDefinition make_diamond(std::uint64_t size, std::int64_t memory_mb) {
  WorkflowDefinition d;
  d.name = "diamond";
  d.entry = "start";
  d.terminals = {"join"};
  d.functions.push_back(fn("start", TransformKind::kMix, {"input"}, memory_mb, 1.0, 5.0, size));
  d.functions.push_back(fn("left", TransformKind::kMix, {"x"}, memory_mb, 2.0, 5.0, size));
  d.functions.push_back(fn("right", TransformKind::kChecksum, {"x"}, memory_mb, 2.0, 5.0));
  d.functions.push_back(fn("join", TransformKind::kConcat, {"l", "r"}, memory_mb, 1.0, 1.0));
  d.flows.push_back(edge("start", "x", {"left", "right"}));
  d.flows.push_back(edge("left", "l", {"join"}));
  d.flows.push_back(edge("right", "r", {"join"}));
  return d;
}

const std::map<std::string, WorkflowFactory>& builtin_workloads() {
  static const std::map<std::string, WorkflowFactory> catalog = {
      {"wc", [](const WorkloadParams& p) { return make_wordcount(p.fan, p.memory_mb); }},
      {"chain",
       [](const WorkloadParams& p) { return make_chain(p.fan, p.input_size, p.memory_mb); }},
      {"switch3", [](const WorkloadParams& p) { return make_switch3(p.input_size, p.memory_mb); }},
      {"diamond", [](const WorkloadParams& p) { return make_diamond(p.input_size, p.memory_mb); }},
  };
  return catalog;
}

WorkflowDefinition resolve_workflow(const std::string& name_or_path, const WorkloadParams& params) {
  const auto& catalog = builtin_workloads();
  if (auto it = catalog.find(name_or_path); it != catalog.end()) return it->second(params);
  if (!std::filesystem::exists(name_or_path))
    throw Error(Errc::kInvalidArgument,
                "'" + name_or_path + "' is neither a builtin workflow nor a file");
  return load_workflow_file(name_or_path);
}

}  // namespace flowrt
