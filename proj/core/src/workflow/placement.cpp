// SPDX-License-Identifier: Apache-2.0
#include "flowrt/workflow/placement.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "flowrt/common/error.hpp"

namespace flowrt {

const NodeId& Placement::node_of(const FunctionName& fn) const {
  auto it = assignment.find(fn);
  if (it == assignment.end())
    throw Error(Errc::kPlacement, "function '" + fn + "' is not placed");
  return it->second;
}

namespace {

void require_nodes(const ClusterConfig& cluster) {
  if (cluster.nodes.empty()) throw Error(Errc::kPlacement, "cluster has no nodes");
}

}  // namespace

Placement RoundRobinPlacement::place(const WorkflowDefinition& def,
                                     const ClusterConfig& cluster) const {
  require_nodes(cluster);
  Placement p;
  std::size_t i = 0;
  for (const auto& fn : def.functions)
    p.assignment[fn.name] = cluster.nodes[i++ % cluster.nodes.size()].id;
  return p;
}

Placement SingleNodePlacement::place(const WorkflowDefinition& def,
                                     const ClusterConfig& cluster) const {
  require_nodes(cluster);
  NodeId node = node_.empty() ? cluster.nodes.front().id : node_;
  if (!cluster.has_node(node))
    throw Error(Errc::kPlacement, "unknown node '" + node + "'");
  Placement p;
  for (const auto& fn : def.functions) p.assignment[fn.name] = node;
  return p;
}

Placement ExplicitPlacement::place(const WorkflowDefinition& def,
                                   const ClusterConfig& cluster) const {
  Placement p;
  for (const auto& fn : def.functions) {
    auto it = map_.find(fn.name);
    if (it == map_.end())
      throw Error(Errc::kPlacement, "no node given for function '" + fn.name + "'");
    if (!cluster.has_node(it->second))
      throw Error(Errc::kPlacement, "function '" + fn.name + "' placed on unknown node '" +
                                        it->second + "'");
    p.assignment[fn.name] = it->second;
  }
  for (const auto& [fn, node] : map_) {
    if (!def.find(fn))
      throw Error(Errc::kPlacement, "placement names unknown function '" + fn + "'");
  }
  return p;
}

Placement plan_placement(const WorkflowDefinition& def, const ClusterConfig& cluster,
                         const PlacementPolicy& policy) {
  return policy.place(def, cluster);
}

Placement plan_placement(const WorkflowDefinition& def, const ClusterConfig& cluster,
                         PlacementKind kind,
                         const std::map<FunctionName, NodeId>& explicit_map) {
  switch (kind) {
    case PlacementKind::kRoundRobin:
      return RoundRobinPlacement{}.place(def, cluster);
    case PlacementKind::kSingleNode:
      return SingleNodePlacement{}.place(def, cluster);
    case PlacementKind::kExplicit:
      return ExplicitPlacement{explicit_map}.place(def, cluster);
  }
  throw Error(Errc::kPlacement, "unknown placement kind");
}

std::map<FunctionName, NodeId> load_placement_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kInvalidArgument, "cannot open placement file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kPlacement, std::string("bad placement file: ") + e.what());
  }
  if (!doc.is_object()) throw Error(Errc::kPlacement, "placement file must be a JSON object");
  std::map<FunctionName, NodeId> out;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!it.value().is_string())
      throw Error(Errc::kPlacement, "node for '" + it.key() + "' must be a string");
    out[it.key()] = it.value().get<std::string>();
  }
  return out;
}

}  // namespace flowrt
