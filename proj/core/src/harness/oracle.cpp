// SPDX-License-Identifier: Apache-2.0
#include "flowrt/harness/oracle.hpp"

namespace flowrt {

GoldenRun golden_run(const WorkflowDefinition& def, const Payload& input) {
  GoldenRun run;
  std::map<FunctionName, InputBundle> staged;
  staged[def.entry][def.entry_input()] = input;
  for (const auto& name : def.topological_order()) {
    auto it = staged.find(name);
    if (it == staged.end()) continue;  // branch not taken
    const FunctionSpec& spec = def.function(name);
    bool satisfied = true;
    for (const auto& d : spec.declared_inputs)
      if (!it->second.count(d)) satisfied = false;
    if (!satisfied) continue;
    run.inputs[name] = it->second;
    Payload out = apply_transform(spec, it->second);
    if (def.is_terminal(name)) run.terminal_outputs[name] = out;
    for (const FlowEdge* e : def.outgoing(name)) {
      if (e->conditional) {
        auto label = select_label(spec.switch_selector.value_or(SwitchSelector{}), e->labels, out);
        for (std::size_t i = 0; i < e->labels.size(); ++i)
          if (e->labels[i] == label) staged[e->destinations[i]].emplace(e->data_name, out);
        continue;
      }
      for (std::size_t i = 0; i < e->destinations.size(); ++i)
        staged[e->destinations[i]].emplace(e->data_name,
                                           route_payload(spec, out, i, e->destinations.size()));
    }
  }
  return run;
}

}  // namespace flowrt
