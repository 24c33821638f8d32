// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "flowrt/workflow/workflow.hpp"

namespace flowrt {

enum class FindingKind {
  kCycle,
  kDanglingReference,
  kOrphanFunction,
  kUnreachable,
  kTerminalHasOutgoing,
  kNoDeclaredInputs,
  kUnsatisfiableInput,
  kNeverSends,
  kBadMemory,
  kEmptyDestinations,
  kDuplicateDestination,
  kDuplicateFunction,
  kDuplicateOutput,
  kSwitchLabels,
  kSwitchDivergent,
  kMissingEntry,
  kNoTerminals,
};

const char* to_string(FindingKind kind) noexcept;

struct Finding {
  FindingKind kind;
  std::string element;  // offending function / edge
  std::string message;
};

struct ValidationReport {
  std::vector<Finding> findings;

  bool ok() const { return findings.empty(); }
  bool has(FindingKind kind) const;
};

ValidationReport validate(const WorkflowDefinition& def);

// Structural findings that make a definition unusable (reported by the
// parser as SemanticError).
bool is_structural(FindingKind kind) noexcept;

}  // namespace flowrt
