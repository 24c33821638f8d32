// SPDX-License-Identifier: Apache-2.0
#include "flowrt/workflow/projection.hpp"

#include <algorithm>

#include "flowrt/common/error.hpp"

namespace flowrt {

bool LocalDataFlowGraph::hosts(const FunctionName& fn) const {
  return std::find(local_functions.begin(), local_functions.end(), fn) !=
         local_functions.end();
}

std::vector<LocalEdge> expand_edges(const WorkflowDefinition& def,
                                    const Placement& placement) {
  std::vector<LocalEdge> out;
  for (const auto& flow : def.flows) {
    for (std::size_t i = 0; i < flow.destinations.size(); ++i) {
      LocalEdge e;
      e.source = flow.source;
      e.data_name = flow.data_name;
      e.destination = flow.destinations[i];
      e.source_node = placement.node_of(flow.source);
      e.destination_node = placement.node_of(flow.destinations[i]);
      e.conditional = flow.conditional;
      if (flow.conditional && i < flow.labels.size()) e.label = flow.labels[i];
      out.push_back(std::move(e));
    }
  }
  return out;
}

LocalDataFlowGraph project_local_graph(const WorkflowDefinition& def,
                                       const Placement& placement,
                                       const ClusterConfig& cluster,
                                       const NodeId& node) {
  if (!cluster.has_node(node)) throw Error(Errc::kUnknownNode, "unknown node '" + node + "'");
  LocalDataFlowGraph g;
  g.node = node;
  for (const auto& fn : def.functions)
    if (placement.node_of(fn.name) == node) g.local_functions.push_back(fn.name);
  for (auto& e : expand_edges(def, placement)) {
    if (e.destination_node == node) g.inbound.push_back(e);
    if (e.source_node == node) g.outbound.push_back(std::move(e));
  }
  return g;
}

}  // namespace flowrt
