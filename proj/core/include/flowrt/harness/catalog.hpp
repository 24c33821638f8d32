// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>

#include "flowrt/workflow/workflow.hpp"

namespace flowrt {

struct WorkloadParams {
  std::size_t fan = 4;
  std::uint64_t input_size = 4 * 1024 * 1024;
  std::int64_t memory_mb = 128;
};

// split -> fan x count -> merge
WorkflowDefinition make_wordcount(std::size_t fan, std::int64_t memory_mb = 128);
// f0 -> f1 -> ... -> f{n-1}; each stage mixes its input into a payload of
// `size` bytes.
WorkflowDefinition make_chain(std::size_t n, std::uint64_t size, std::int64_t memory_mb = 128);
// start -switch-> {fa, fb, fc} -> out -> end
WorkflowDefinition make_switch3(std::uint64_t size, std::int64_t memory_mb = 128);
// start -> {left, right} -> join
WorkflowDefinition make_diamond(std::uint64_t size, std::int64_t memory_mb = 128);

using WorkflowFactory = std::function<WorkflowDefinition(const WorkloadParams&)>;

// Named parameterized workflows: wc, chain, switch3, diamond.
const std::map<std::string, WorkflowFactory>& builtin_workloads();

// A builtin name or a path to a workflow document.
WorkflowDefinition resolve_workflow(const std::string& name_or_path, const WorkloadParams& params);

}  // namespace flowrt
