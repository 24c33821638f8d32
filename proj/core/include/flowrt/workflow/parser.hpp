// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

#include "flowrt/workflow/workflow.hpp"

namespace flowrt {

// Parses the line-oriented workflow document:
//
//   workflow: wordcount
//   function start:
//     memory_mb: 128
//     compute: split cost=2
//     inputs: [input]
//     outputs: [part -> count0, count1]
//   function count0:
//     ...
//     switch: img -> {small: resize, big: compress} by hash
//   entry: start
//   terminals: [merge]
//
// Throws Error(kSyntax) for malformed text and Error(kSemantic) for
// cycles, dangling references, orphans and terminals with outgoing edges.
WorkflowDefinition parse_workflow(std::string_view text);

WorkflowDefinition load_workflow_file(const std::string& path);

// Inverse of parse_workflow: parse_workflow(format_workflow(d)) == d.
std::string format_workflow(const WorkflowDefinition& def);

}  // namespace flowrt
