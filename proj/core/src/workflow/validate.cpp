// SPDX-License-Identifier: Apache-2.0
#include "flowrt/workflow/validate.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace flowrt {

const char* to_string(FindingKind kind) noexcept {
  switch (kind) {
    case FindingKind::kCycle: return "cycle";
    case FindingKind::kDanglingReference: return "dangling reference";
    case FindingKind::kOrphanFunction: return "orphan function";
    case FindingKind::kUnreachable: return "unreachable function";
    case FindingKind::kTerminalHasOutgoing: return "terminal with outgoing edge";
    case FindingKind::kNoDeclaredInputs: return "no declared inputs";
    case FindingKind::kUnsatisfiableInput: return "unsatisfiable input";
    case FindingKind::kNeverSends: return "function never sends";
    case FindingKind::kBadMemory: return "invalid memory size";
    case FindingKind::kEmptyDestinations: return "edge without destinations";
    case FindingKind::kDuplicateDestination: return "duplicate destination";
    case FindingKind::kDuplicateFunction: return "duplicate function";
    case FindingKind::kDuplicateOutput: return "duplicate output";
    case FindingKind::kSwitchLabels: return "malformed switch";
    case FindingKind::kSwitchDivergent: return "switch branches diverge";
    case FindingKind::kMissingEntry: return "missing entry";
    case FindingKind::kNoTerminals: return "no terminals";
  }
  return "finding";
}

bool ValidationReport::has(FindingKind kind) const {
  return std::any_of(findings.begin(), findings.end(),
                     [&](const Finding& f) { return f.kind == kind; });
}

bool is_structural(FindingKind kind) noexcept {
  switch (kind) {
    case FindingKind::kUnreachable:
    case FindingKind::kUnsatisfiableInput:
    case FindingKind::kNeverSends:
    case FindingKind::kSwitchDivergent:
      return false;
    default:
      return true;
  }
}

namespace {

using Graph = std::map<FunctionName, std::vector<FunctionName>>;

// Depth-first search for a back edge; returns {from, to} of the first one.
std::optional<std::pair<FunctionName, FunctionName>> find_back_edge(
    const WorkflowDefinition& def, const Graph& succ) {
  enum class Color { kWhite, kGrey, kBlack };
  std::map<FunctionName, Color> color;
  for (const auto& f : def.functions) color[f.name] = Color::kWhite;
  std::optional<std::pair<FunctionName, FunctionName>> found;

  std::function<void(const FunctionName&)> visit = [&](const FunctionName& u) {
    color[u] = Color::kGrey;
    auto it = succ.find(u);
    if (it != succ.end()) {
      for (const auto& v : it->second) {
        if (found) return;
        if (color[v] == Color::kGrey) {
          found = {u, v};
          return;
        }
        if (color[v] == Color::kWhite) visit(v);
      }
    }
    color[u] = Color::kBlack;
  };
  for (const auto& f : def.functions) {
    if (found) break;
    if (color[f.name] == Color::kWhite) visit(f.name);
  }
  return found;
}

std::set<FunctionName> reachable_from(const FunctionName& start, const Graph& succ) {
  std::set<FunctionName> seen{start};
  std::vector<FunctionName> stack{start};
  while (!stack.empty()) {
    auto u = stack.back();
    stack.pop_back();
    auto it = succ.find(u);
    if (it == succ.end()) continue;
    for (const auto& v : it->second)
      if (seen.insert(v).second) stack.push_back(v);
  }
  return seen;
}

}  // namespace

ValidationReport validate(const WorkflowDefinition& def) {
  ValidationReport report;
  auto add = [&](FindingKind kind, std::string element, std::string msg) {
    report.findings.push_back({kind, std::move(element), std::move(msg)});
  };

  std::set<FunctionName> names;
  for (const auto& f : def.functions) {
    if (!names.insert(f.name).second)
      add(FindingKind::kDuplicateFunction, f.name, "function declared twice");
    if (f.memory_mb <= 0)
      add(FindingKind::kBadMemory, f.name, "memory_mb must be positive");
  }

  if (def.entry.empty())
    add(FindingKind::kMissingEntry, "entry", "no entry function");
  else if (!names.count(def.entry))
    add(FindingKind::kDanglingReference, def.entry,
        "entry names unknown function '" + def.entry + "'");
  if (def.terminals.empty())
    add(FindingKind::kNoTerminals, "terminals", "no terminal function");
  for (const auto& t : def.terminals)
    if (!names.count(t))
      add(FindingKind::kDanglingReference, t,
          "terminal names unknown function '" + t + "'");

  Graph succ;
  std::set<FunctionName> in_flow;
  std::set<std::pair<FunctionName, DataName>> outputs;
  // (destination, data) pairs delivered by some edge.
  std::set<std::pair<FunctionName, DataName>> delivered;
  for (const auto& e : def.flows) {
    std::string edge_name = e.source + "." + e.data_name;
    if (!names.count(e.source))
      add(FindingKind::kDanglingReference, edge_name,
          "edge source '" + e.source + "' is not a function");
    if (!outputs.insert({e.source, e.data_name}).second)
      add(FindingKind::kDuplicateOutput, edge_name,
          "data '" + e.data_name + "' of '" + e.source +
              "' is routed by more than one edge");
    if (e.destinations.empty())
      add(FindingKind::kEmptyDestinations, edge_name, "edge has no destinations");
    std::set<FunctionName> dests;
    for (const auto& d : e.destinations) {
      if (!dests.insert(d).second)
        add(FindingKind::kDuplicateDestination, edge_name,
            "destination '" + d + "' listed twice");
      if (!names.count(d))
        add(FindingKind::kDanglingReference, edge_name,
            "destination '" + d + "' is not a function");
      in_flow.insert(d);
      delivered.insert({d, e.data_name});
      if (names.count(e.source) && names.count(d)) succ[e.source].push_back(d);
    }
    in_flow.insert(e.source);
    if (e.conditional) {
      std::set<std::string> labels(e.labels.begin(), e.labels.end());
      if (e.labels.size() != e.destinations.size() ||
          labels.size() != e.labels.size())
        add(FindingKind::kSwitchLabels, edge_name,
            "switch needs one distinct label per destination");
      const auto* src = def.find(e.source);
      if (src && src->switch_selector &&
          src->switch_selector->kind == SwitchSelector::Kind::kConst &&
          !labels.count(src->switch_selector->label))
        add(FindingKind::kSwitchLabels, edge_name,
            "constant selector names unknown label '" +
                src->switch_selector->label + "'");
    }
    if (def.is_terminal(e.source))
      add(FindingKind::kTerminalHasOutgoing, edge_name,
          "terminal '" + e.source + "' has an outgoing edge");
  }

  if (auto back = find_back_edge(def, succ))
    add(FindingKind::kCycle, back->first + "->" + back->second,
        "back edge " + back->first + " -> " + back->second);

  for (const auto& f : def.functions) {
    if (f.name != def.entry && !in_flow.count(f.name))
      add(FindingKind::kOrphanFunction, f.name,
          "function is neither the entry nor referenced by any flow");
    if (f.name != def.entry && f.declared_inputs.empty())
      add(FindingKind::kNoDeclaredInputs, f.name,
          "non-entry function declares no inputs");
    for (std::size_t i = 0; i < f.declared_inputs.size(); ++i) {
      const auto& in = f.declared_inputs[i];
      bool from_gateway = f.name == def.entry && i == 0;
      if (!from_gateway && !delivered.count({f.name, in}))
        add(FindingKind::kUnsatisfiableInput, f.name + "." + in,
            "no edge delivers '" + in + "' to '" + f.name + "'");
    }
    if (!def.is_terminal(f.name) && def.outgoing(f.name).empty())
      add(FindingKind::kNeverSends, f.name,
          "non-terminal function has no outgoing data");
  }

  if (!report.has(FindingKind::kCycle) && names.count(def.entry)) {
    auto live = reachable_from(def.entry, succ);
    for (const auto& f : def.functions)
      if (!live.count(f.name) && in_flow.count(f.name))
        add(FindingKind::kUnreachable, f.name, "not reachable from the entry");

    std::set<FunctionName> terminals(def.terminals.begin(), def.terminals.end());
    for (const auto& e : def.flows) {
      if (!e.conditional || e.destinations.size() < 2) continue;
      std::optional<std::set<FunctionName>> first;
      for (const auto& d : e.destinations) {
        std::set<FunctionName> t;
        for (const auto& r : reachable_from(d, succ))
          if (terminals.count(r)) t.insert(r);
        if (!first) {
          first = t;
        } else if (*first != t) {
          add(FindingKind::kSwitchDivergent, e.source + "." + e.data_name,
              "switch destinations reach different terminals");
          break;
        }
      }
    }
  }
  return report;
}

}  // namespace flowrt
