// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flowrt/common/types.hpp"

namespace flowrt {

// Synthetic, deterministic function bodies. Each one is byte-verifiable.
enum class TransformKind {
  kConcat,     // inputs concatenated in declared order
  kSplit,      // destination i of a k-way edge receives slice i of the input
  kWordCount,  // 8-byte big-endian count of space/newline separated words
  kSum,        // 8-byte big-endian sum of all 8-byte big-endian input words
  kChecksum,   // 4-byte big-endian crc32 of the input
  kMix,        // N pseudo-random bytes seeded by the input's crc32
};

const char* to_string(TransformKind kind) noexcept;
std::optional<TransformKind> transform_from_string(std::string_view s) noexcept;

struct ComputeModel {
  TransformKind transform = TransformKind::kConcat;
  std::uint64_t mix_bytes = 0;   // output size of kMix
  double cost_ms_per_mib = 0.0;  // CPU-milliseconds per MiB of input
  double base_cpu_ms = 0.0;      // CPU-milliseconds per invocation
  double emit_fraction = 1.0;    // point of execution at which outputs emit

  // Wall-clock execution time on `cores` of CPU.
  Nanos duration(std::uint64_t input_bytes, double cores) const;

  friend bool operator==(const ComputeModel&, const ComputeModel&) = default;
};

// Chooses a label of a conditional edge from the emitted payload.
struct SwitchSelector {
  enum class Kind { kHash, kConst };
  Kind kind = Kind::kHash;
  std::string label;  // for kConst

  friend bool operator==(const SwitchSelector&, const SwitchSelector&) = default;
};

struct ResourceSpec {
  std::int64_t memory_mb = 128;
  double cpu_cores = 0.1;
  double bandwidth_mbps = 40.0;

  // 0.1 core and 40 Mbps per 128 MB, scaled linearly.
  static ResourceSpec from_memory(std::int64_t memory_mb);
  double bandwidth_bps() const { return bandwidth_mbps * 1e6; }
};

struct FunctionSpec {
  FunctionName name;
  ComputeModel compute;
  std::vector<DataName> declared_inputs;
  std::int64_t memory_mb = 128;
  std::optional<SwitchSelector> switch_selector;

  ResourceSpec resources() const { return ResourceSpec::from_memory(memory_mb); }

  friend bool operator==(const FunctionSpec&, const FunctionSpec&) = default;
};

struct FlowEdge {
  FunctionName source;
  DataName data_name;
  std::vector<FunctionName> destinations;  // FIFO order for fan-out
  bool conditional = false;
  std::vector<std::string> labels;  // parallel to destinations when conditional

  friend bool operator==(const FlowEdge&, const FlowEdge&) = default;
};

struct WorkflowDefinition {
  std::string name;
  std::vector<FunctionSpec> functions;
  std::vector<FlowEdge> flows;
  FunctionName entry;
  std::vector<FunctionName> terminals;

  const FunctionSpec* find(const FunctionName& fn) const;
  const FunctionSpec& function(const FunctionName& fn) const;
  bool is_terminal(const FunctionName& fn) const;
  std::vector<const FlowEdge*> outgoing(const FunctionName& fn) const;
  const FlowEdge* outgoing_edge(const FunctionName& fn, const DataName& data) const;
  // Data name the gateway uses to deliver request input to the entry.
  DataName entry_input() const;
  // Function names in a deterministic topological order. Requires a DAG.
  std::vector<FunctionName> topological_order() const;

  friend bool operator==(const WorkflowDefinition&, const WorkflowDefinition&) = default;
};

}  // namespace flowrt
