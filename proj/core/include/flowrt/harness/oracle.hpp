// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>

#include "flowrt/workflow/transforms.hpp"

namespace flowrt {

struct GoldenRun {
  // Inputs each executed function receives, keyed by function.
  std::map<FunctionName, InputBundle> inputs;
  // Output of each terminal that runs.
  std::map<FunctionName, Payload> terminal_outputs;
};

// Straight-line evaluation of the transform composition, with no runtime
// involved: the reference every execution mode is checked against.
GoldenRun golden_run(const WorkflowDefinition& def, const Payload& input);

}  // namespace flowrt
