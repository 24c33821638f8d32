// SPDX-License-Identifier: Apache-2.0
#include <set>
#include <string>

#include "flowrt/common/cluster_config.hpp"
#include "flowrt/common/error.hpp"
#include "flowrt/common/hash.hpp"
#include "flowrt/common/types.hpp"

namespace flowrt {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::kSyntax: return "SyntaxError";
    case Errc::kSemantic: return "SemanticError";
    case Errc::kPlacement: return "PlacementError";
    case Errc::kUnknownNode: return "UnknownNode";
    case Errc::kNetworkUnreachable: return "NetworkUnreachable";
    case Errc::kSeqGap: return "SeqGap";
    case Errc::kTransferInterrupted: return "TransferInterrupted";
    case Errc::kRetentionLost: return "RetentionLost";
    case Errc::kRequestTooLarge: return "RequestTooLarge";
    case Errc::kNotReady: return "NotReady";
    case Errc::kAlreadyTaken: return "AlreadyTaken";
    case Errc::kStillNeeded: return "StillNeeded";
    case Errc::kSpillIo: return "SpillIOFailure";
    case Errc::kNoIdleSlot: return "NoIdleSlot";
    case Errc::kComputeFault: return "ComputeFault";
    case Errc::kUnknownData: return "UnknownData";
    case Errc::kAmbiguousSwitch: return "AmbiguousSwitch";
    case Errc::kUnrecoverable: return "Unrecoverable";
    case Errc::kConfig: return "ConfigError";
    case Errc::kMismatchedWorkloads: return "MismatchedWorkloads";
    case Errc::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

RequestId RequestId::from_words(std::uint64_t hi, std::uint64_t lo) {
  RequestId id;
  for (int i = 0; i < 8; ++i) {
    id.bytes[i] = static_cast<std::uint8_t>(hi >> (56 - 8 * i));
    id.bytes[8 + i] = static_cast<std::uint8_t>(lo >> (56 - 8 * i));
  }
  return id;
}

std::uint64_t RequestId::hi() const {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | bytes[i];
  return v;
}

std::uint64_t RequestId::lo() const {
  std::uint64_t v = 0;
  for (int i = 8; i < 16; ++i) v = (v << 8) | bytes[i];
  return v;
}

std::string RequestId::hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(32);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

FlowId make_flow_id(const FunctionName& source, const DataName& data,
                    const FunctionName& destination) {
  std::uint64_t h = fnv1a64(source);
  h = fnv1a64(std::string_view("\0", 1), h);
  h = fnv1a64(data, h);
  h = fnv1a64(std::string_view("\0", 1), h);
  h = fnv1a64(destination, h);
  return FlowId{h};
}

ClusterConfig ClusterConfig::three_node() {
  ClusterConfig cfg;
  for (int i = 0; i < 3; ++i) cfg.nodes.push_back({"n" + std::to_string(i)});
  return cfg;
}

ClusterConfig ClusterConfig::single_node() {
  ClusterConfig cfg;
  cfg.nodes.push_back({"n0"});
  return cfg;
}

bool ClusterConfig::has_node(const NodeId& id) const {
  for (const auto& n : nodes)
    if (n.id == id) return true;
  return false;
}

void ClusterConfig::validate() const {
  if (nodes.empty()) throw Error(Errc::kConfig, "cluster has no nodes");
  std::set<NodeId> seen;
  for (const auto& n : nodes) {
    if (n.id.empty()) throw Error(Errc::kConfig, "empty node id");
    if (!seen.insert(n.id).second)
      throw Error(Errc::kConfig, "duplicate node id '" + n.id + "'");
    if (n.cores <= 0 || n.memory_mb <= 0)
      throw Error(Errc::kConfig, "node '" + n.id + "' has no resources");
  }
  if (runtime.alpha <= 0) throw Error(Errc::kConfig, "alpha must be > 0");
  if (runtime.ewma_beta <= 0 || runtime.ewma_beta > 1)
    throw Error(Errc::kConfig, "ewma weight must be in (0, 1]");
  if (runtime.flu_slots < 1) throw Error(Errc::kConfig, "flu_slots must be >= 1");
  if (runtime.max_containers_per_function < 1)
    throw Error(Errc::kConfig, "max containers must be >= 1");
}

}  // namespace flowrt
