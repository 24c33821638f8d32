// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "flowrt/workflow/placement.hpp"

namespace flowrt {

// One (source, data, destination) triple of the data-flow graph, annotated
// with both endpoint nodes.
struct LocalEdge {
  FunctionName source;
  DataName data_name;
  FunctionName destination;
  NodeId source_node;
  NodeId destination_node;
  bool conditional = false;
  std::string label;

  bool is_local() const { return source_node == destination_node; }
  FlowId flow_id() const { return make_flow_id(source, data_name, destination); }

  friend bool operator==(const LocalEdge&, const LocalEdge&) = default;
  friend auto operator<=>(const LocalEdge&, const LocalEdge&) = default;
};

struct LocalDataFlowGraph {
  NodeId node;
  std::vector<FunctionName> local_functions;
  // Edges whose destination is local (source local or remote).
  std::vector<LocalEdge> inbound;
  // Edges whose source is local (destination local or remote). Local-to-local
  // edges appear in both lists.
  std::vector<LocalEdge> outbound;

  bool hosts(const FunctionName& fn) const;
  bool empty() const { return local_functions.empty(); }
};

// Pure: depends only on its inputs. Throws Error(kUnknownNode) if `node` is
// not in the cluster.
LocalDataFlowGraph project_local_graph(const WorkflowDefinition& def,
                                       const Placement& placement,
                                       const ClusterConfig& cluster,
                                       const NodeId& node);

// Every (source, data, destination) triple of the definition in edge order.
std::vector<LocalEdge> expand_edges(const WorkflowDefinition& def,
                                    const Placement& placement);

}  // namespace flowrt
