// SPDX-License-Identifier: Apache-2.0
#include "flowrt/workflow/workflow.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>

#include "flowrt/common/error.hpp"

namespace flowrt {

const char* to_string(TransformKind kind) noexcept {
  switch (kind) {
    case TransformKind::kConcat: return "concat";
    case TransformKind::kSplit: return "split";
    case TransformKind::kWordCount: return "wordcount";
    case TransformKind::kSum: return "sum";
    case TransformKind::kChecksum: return "checksum";
    case TransformKind::kMix: return "mix";
  }
  return "concat";
}

std::optional<TransformKind> transform_from_string(std::string_view s) noexcept {
  for (auto k : {TransformKind::kConcat, TransformKind::kSplit,
                 TransformKind::kWordCount, TransformKind::kSum,
                 TransformKind::kChecksum, TransformKind::kMix}) {
    if (s == to_string(k)) return k;
  }
  if (s == "identity") return TransformKind::kConcat;
  return std::nullopt;
}

Nanos ComputeModel::duration(std::uint64_t input_bytes, double cores) const {
  double mib = static_cast<double>(input_bytes) / (1024.0 * 1024.0);
  double cpu_ms = base_cpu_ms + cost_ms_per_mib * mib;
  return from_millis(cpu_ms / cores);
}

ResourceSpec ResourceSpec::from_memory(std::int64_t memory_mb) {
  ResourceSpec r;
  r.memory_mb = memory_mb;
  double scale = static_cast<double>(memory_mb) / 128.0;
  r.cpu_cores = 0.1 * scale;
  r.bandwidth_mbps = 40.0 * scale;
  return r;
}

const FunctionSpec* WorkflowDefinition::find(const FunctionName& fn) const {
  for (const auto& f : functions)
    if (f.name == fn) return &f;
  return nullptr;
}

const FunctionSpec& WorkflowDefinition::function(const FunctionName& fn) const {
  if (const auto* f = find(fn)) return *f;
  throw Error(Errc::kSemantic, "unknown function '" + fn + "'");
}

bool WorkflowDefinition::is_terminal(const FunctionName& fn) const {
  return std::find(terminals.begin(), terminals.end(), fn) != terminals.end();
}

std::vector<const FlowEdge*> WorkflowDefinition::outgoing(
    const FunctionName& fn) const {
  std::vector<const FlowEdge*> out;
  for (const auto& e : flows)
    if (e.source == fn) out.push_back(&e);
  return out;
}

const FlowEdge* WorkflowDefinition::outgoing_edge(const FunctionName& fn,
                                                  const DataName& data) const {
  for (const auto& e : flows)
    if (e.source == fn && e.data_name == data) return &e;
  return nullptr;
}

DataName WorkflowDefinition::entry_input() const {
  if (const auto* f = find(entry); f && !f->declared_inputs.empty())
    return f->declared_inputs.front();
  return "input";
}

std::vector<FunctionName> WorkflowDefinition::topological_order() const {
  std::map<FunctionName, int> indegree;
  std::map<FunctionName, std::vector<FunctionName>> succ;
  for (const auto& f : functions) indegree[f.name] = 0;
  for (const auto& e : flows) {
    for (const auto& d : e.destinations) {
      if (!indegree.count(d) || !indegree.count(e.source)) continue;
      succ[e.source].push_back(d);
      ++indegree[d];
    }
  }
  // Ties broken by declaration order.
  std::map<FunctionName, std::size_t> decl;
  for (std::size_t i = 0; i < functions.size(); ++i) decl[functions[i].name] = i;
  auto cmp = [&](const FunctionName& a, const FunctionName& b) {
    return decl[a] > decl[b];
  };
  std::priority_queue<FunctionName, std::vector<FunctionName>, decltype(cmp)> ready(cmp);
  for (const auto& [fn, deg] : indegree)
    if (deg == 0) ready.push(fn);
  std::vector<FunctionName> order;
  while (!ready.empty()) {
    auto fn = ready.top();
    ready.pop();
    order.push_back(fn);
    for (const auto& d : succ[fn])
      if (--indegree[d] == 0) ready.push(d);
  }
  if (order.size() != functions.size())
    throw Error(Errc::kSemantic, "workflow '" + name + "' contains a cycle");
  return order;
}

}  // namespace flowrt
