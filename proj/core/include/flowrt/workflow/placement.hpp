// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <string>

#include "flowrt/common/cluster_config.hpp"
#include "flowrt/workflow/workflow.hpp"

namespace flowrt {

struct Placement {
  std::map<FunctionName, NodeId> assignment;

  const NodeId& node_of(const FunctionName& fn) const;
  friend bool operator==(const Placement&, const Placement&) = default;
};

// Interface exposed to an upper load balancer.
class PlacementPolicy {
 public:
  virtual ~PlacementPolicy() = default;
  virtual Placement place(const WorkflowDefinition& def,
                          const ClusterConfig& cluster) const = 0;
};

// Functions in declaration order over nodes in configuration order.
class RoundRobinPlacement final : public PlacementPolicy {
 public:
  Placement place(const WorkflowDefinition& def,
                  const ClusterConfig& cluster) const override;
};

class SingleNodePlacement final : public PlacementPolicy {
 public:
  explicit SingleNodePlacement(NodeId node = {}) : node_(std::move(node)) {}
  Placement place(const WorkflowDefinition& def,
                  const ClusterConfig& cluster) const override;

 private:
  NodeId node_;  // empty: first configured node
};

class ExplicitPlacement final : public PlacementPolicy {
 public:
  explicit ExplicitPlacement(std::map<FunctionName, NodeId> map)
      : map_(std::move(map)) {}
  Placement place(const WorkflowDefinition& def,
                  const ClusterConfig& cluster) const override;

 private:
  std::map<FunctionName, NodeId> map_;
};

enum class PlacementKind { kRoundRobin, kSingleNode, kExplicit };

// Convenience entry point. Throws Error(kPlacement) for a partial explicit
// map or unknown node ids.
Placement plan_placement(const WorkflowDefinition& def,
                         const ClusterConfig& cluster,
                         PlacementKind kind = PlacementKind::kRoundRobin,
                         const std::map<FunctionName, NodeId>& explicit_map = {});

Placement plan_placement(const WorkflowDefinition& def,
                         const ClusterConfig& cluster,
                         const PlacementPolicy& policy);

// Reads a {"function": "node", ...} JSON document.
std::map<FunctionName, NodeId> load_placement_file(const std::string& path);

}  // namespace flowrt
