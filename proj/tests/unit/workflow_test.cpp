// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <fstream>

#include "flowrt/common/error.hpp"
#include "flowrt/harness/catalog.hpp"
#include "flowrt/workflow/parser.hpp"
#include "flowrt/workflow/placement.hpp"
#include "flowrt/workflow/projection.hpp"
#include "flowrt/workflow/validate.hpp"
#include "support/oracles.hpp"

namespace flowrt {
namespace {

const char* kChain = R"(workflow: tiny
function a:
  memory_mb: 256
  compute: mix(1024) cost=1 base=2 emit=0.5
  inputs: [input]
  outputs: [x -> b]
function b:
  memory_mb: 128
  compute: checksum
  inputs: [x]
entry: a
terminals: [b]
)";

Errc parse_error(const std::string& text) {
  try {
    parse_workflow(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "parsed:\n" << text;
  return Errc::kInvalidArgument;
}

TEST(Parser, ReadsFields) {
  auto def = parse_workflow(kChain);
  EXPECT_EQ(def.name, "tiny");
  EXPECT_EQ(def.entry, "a");
  EXPECT_EQ(def.terminals, std::vector<FunctionName>{"b"});
  const auto& a = def.function("a");
  EXPECT_EQ(a.memory_mb, 256);
  EXPECT_EQ(a.compute.transform, TransformKind::kMix);
  EXPECT_EQ(a.compute.mix_bytes, 1024u);
  EXPECT_DOUBLE_EQ(a.compute.cost_ms_per_mib, 1.0);
  EXPECT_DOUBLE_EQ(a.compute.base_cpu_ms, 2.0);
  EXPECT_DOUBLE_EQ(a.compute.emit_fraction, 0.5);
  ASSERT_EQ(def.flows.size(), 1u);
  EXPECT_EQ(def.flows[0].source, "a");
  EXPECT_EQ(def.flows[0].data_name, "x");
  EXPECT_EQ(def.flows[0].destinations, std::vector<FunctionName>{"b"});
  EXPECT_EQ(def.entry_input(), "input");
}

TEST(Parser, RoundTripsBuiltins) {
  std::vector<WorkflowDefinition> defs = {make_wordcount(4), make_wordcount(16),
                                          make_chain(5, 4096), make_switch3(65536),
                                          make_diamond(1024), parse_workflow(kChain)};
  for (const auto& d : defs) {
    auto text = format_workflow(d);
    EXPECT_EQ(parse_workflow(text), d) << text;
    EXPECT_EQ(format_workflow(parse_workflow(text)), text);
  }
}

TEST(Parser, RoundTripsSwitch) {
  auto d = make_switch3(100);
  auto back = parse_workflow(format_workflow(d));
  const auto* e = back.outgoing_edge("start", "img");
  ASSERT_NE(e, nullptr);
  EXPECT_TRUE(e->conditional);
  EXPECT_EQ(e->labels, (std::vector<std::string>{"a", "b", "c"}));
  ASSERT_TRUE(back.function("start").switch_selector);
}

TEST(Parser, SyntaxErrors) {
  EXPECT_EQ(parse_error("workflow tiny\n"), Errc::kSyntax);
  EXPECT_EQ(parse_error("workflow: t\nfunction a:\n  compute: teleport\n  inputs: [input]\n"
                        "entry: a\nterminals: [a]\n"),
            Errc::kSyntax);
  EXPECT_EQ(parse_error("workflow: t\nfunction a:\n  inputs: input\nentry: a\nterminals: [a]\n"),
            Errc::kSyntax);
  EXPECT_EQ(parse_error("workflow: t\nfunction a:\n  memory_mb: many\n  inputs: [input]\n"
                        "entry: a\nterminals: [a]\n"),
            Errc::kSyntax);
}

TEST(Parser, SemanticErrors) {
  // Cycle a -> b -> a.
  EXPECT_EQ(parse_error(R"(workflow: t
function a:
  compute: concat
  inputs: [input, y]
  outputs: [x -> b]
function b:
  compute: concat
  inputs: [x]
  outputs: [y -> a]
function c:
  compute: concat
  inputs: [x]
entry: a
terminals: [c]
)"),
            Errc::kSemantic);
  // Dangling destination.
  EXPECT_EQ(parse_error(R"(workflow: t
function a:
  compute: concat
  inputs: [input]
  outputs: [x -> ghost]
entry: a
terminals: [a]
)"),
            Errc::kSemantic);
  // Terminal with an outgoing edge.
  EXPECT_EQ(parse_error(R"(workflow: t
function a:
  compute: concat
  inputs: [input]
  outputs: [x -> b]
function b:
  compute: concat
  inputs: [x]
entry: a
terminals: [a, b]
)"),
            Errc::kSemantic);
}

TEST(Validate, BuiltinsAreClean) {
  for (const auto& [name, factory] : builtin_workloads()) {
    auto report = validate(factory(WorkloadParams{}));
    EXPECT_TRUE(report.ok()) << name;
  }
}

TEST(Validate, ReportsFindings) {
  auto d = make_chain(3, 64);
  d.functions.push_back(d.functions.back());
  auto r = validate(d);
  EXPECT_TRUE(r.has(FindingKind::kDuplicateFunction));

  d = make_chain(3, 64);
  d.functions[1].memory_mb = 0;
  EXPECT_TRUE(validate(d).has(FindingKind::kBadMemory));

  d = make_chain(3, 64);
  d.functions[1].declared_inputs.push_back("never_sent");
  EXPECT_TRUE(validate(d).has(FindingKind::kUnsatisfiableInput));

  d = make_chain(3, 64);
  d.entry = "nope";
  EXPECT_TRUE(validate(d).has(FindingKind::kDanglingReference));
  d.entry.clear();
  EXPECT_TRUE(validate(d).has(FindingKind::kMissingEntry));

  d = make_chain(3, 64);
  d.terminals.clear();
  EXPECT_TRUE(validate(d).has(FindingKind::kNoTerminals));

  d = make_diamond(64);
  d.flows[0].destinations.push_back(d.flows[0].destinations[0]);
  EXPECT_TRUE(validate(d).has(FindingKind::kDuplicateDestination));
}

TEST(Validate, SwitchLabelsMustMatchDestinations) {
  auto d = make_switch3(64);
  for (auto& f : d.flows)
    if (f.conditional) f.labels.pop_back();
  EXPECT_TRUE(validate(d).has(FindingKind::kSwitchLabels));
}

TEST(Catalog, Sizes) {
  auto wc = make_wordcount(16);
  EXPECT_EQ(wc.functions.size(), 18u);
  EXPECT_EQ(wc.entry, "start");
  auto c1 = make_chain(1, 64);
  ASSERT_EQ(c1.functions.size(), 1u);
  EXPECT_TRUE(c1.is_terminal(c1.entry));
  auto order = make_chain(4, 64).topological_order();
  EXPECT_EQ(order, (std::vector<FunctionName>{"f0", "f1", "f2", "f3"}));
  EXPECT_THROW(resolve_workflow("definitely-not-a-workflow", {}), Error);
}

TEST(Placement, RoundRobinSingleAndExplicit) {
  auto cluster = ClusterConfig::three_node();
  auto d = make_wordcount(4);
  auto rr = plan_placement(d, cluster);
  std::vector<NodeId> expect = {"n0", "n1", "n2", "n0", "n1", "n2"};
  for (std::size_t i = 0; i < d.functions.size(); ++i)
    EXPECT_EQ(rr.node_of(d.functions[i].name), expect[i]);

  auto single = plan_placement(d, cluster, PlacementKind::kSingleNode);
  for (const auto& f : d.functions) EXPECT_EQ(single.node_of(f.name), "n0");

  std::map<FunctionName, NodeId> partial = {{"start", "n1"}};
  try {
    plan_placement(d, cluster, PlacementKind::kExplicit, partial);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kPlacement);
  }
  std::map<FunctionName, NodeId> full;
  for (const auto& f : d.functions) full[f.name] = "n2";
  EXPECT_EQ(plan_placement(d, cluster, PlacementKind::kExplicit, full).node_of("merge"), "n2");
  full["merge"] = "n9";
  EXPECT_THROW(plan_placement(d, cluster, PlacementKind::kExplicit, full), Error);
}

TEST(Projection, PartitionsEdgesByNode) {
  auto cluster = ClusterConfig::three_node();
  auto d = make_wordcount(4);
  auto p = plan_placement(d, cluster);
  auto all = expand_edges(d, p);
  EXPECT_EQ(all.size(), 8u);  // 4 parts + 4 counts

  std::size_t inbound = 0, outbound = 0, local = 0;
  for (const auto& node : cluster.nodes) {
    auto g = project_local_graph(d, p, cluster, node.id);
    for (const auto& e : g.inbound) {
      EXPECT_EQ(e.destination_node, node.id);
      EXPECT_TRUE(g.hosts(e.destination));
    }
    for (const auto& e : g.outbound) {
      EXPECT_EQ(e.source_node, node.id);
      local += e.is_local();
    }
    inbound += g.inbound.size();
    outbound += g.outbound.size();
  }
  EXPECT_EQ(inbound, all.size());
  EXPECT_EQ(outbound, all.size());
  std::size_t local_edges = 0;
  for (const auto& e : all) local_edges += e.is_local();
  EXPECT_EQ(local, local_edges);
  EXPECT_THROW(project_local_graph(d, p, cluster, "n7"), Error);
}

TEST(Projection, IsDeterministic) {
  auto cluster = ClusterConfig::three_node();
  auto d = make_diamond(64);
  auto p = plan_placement(d, cluster);
  auto a = project_local_graph(d, p, cluster, "n1");
  auto b = project_local_graph(d, p, cluster, "n1");
  EXPECT_EQ(a.local_functions, b.local_functions);
  EXPECT_EQ(a.inbound, b.inbound);
  EXPECT_EQ(a.outbound, b.outbound);
}

TEST(WorkflowFiles, ShippedDocumentsParse) {
  for (const char* name : {"wc.flow", "chain3.flow", "switch3.flow", "diamond.flow"}) {
    auto d = load_workflow_file(std::string(FLOWRT_WORKFLOWS_DIR) + "/" + name);
    EXPECT_TRUE(validate(d).ok()) << name;
  }
}

}  // namespace
}  // namespace flowrt
