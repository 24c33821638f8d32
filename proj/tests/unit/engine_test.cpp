// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "flowrt/common/error.hpp"
#include "flowrt/engine/node_engine.hpp"
#include "flowrt/harness/catalog.hpp"
#include "flowrt/harness/cluster.hpp"
#include "flowrt/runtime/container.hpp"
#include "flowrt/runtime/pressure.hpp"
#include "flowrt/workflow/placement.hpp"
#include "flowrt/workflow/projection.hpp"
#include "support/oracles.hpp"

namespace flowrt {
namespace {

using testing::TestRng;

TEST(Pressure, Formula) {
  auto p = estimate_pressure(5'000'000, 40e6, 0.5, 1.1);
  EXPECT_DOUBLE_EQ(p.pressure, 1.1 * 1.0 - 0.5);
  EXPECT_TRUE(p.blocks());
  auto q = estimate_pressure(1000, 40e6, 0.5, 1.1);
  EXPECT_LT(q.pressure, 0.0);
  EXPECT_FALSE(q.blocks());
  EXPECT_FALSE(estimate_pressure(0, 40e6, 0.0, 1.1).blocks());
}

TEST(Pressure, EwmaSeedsThenBlends) {
  FluStats s;
  EXPECT_EQ(s.t_flu(), 0.0);
  s = update_flu_stats(s, 2.0);
  EXPECT_DOUBLE_EQ(s.t_flu(), 2.0);
  s = update_flu_stats(s, 1.0);
  EXPECT_DOUBLE_EQ(s.t_flu(), 0.3 * 1.0 + 0.7 * 2.0);
  EXPECT_EQ(s.count, 2u);
}

TEST(Resources, ScaleWithMemory) {
  auto r = ResourceSpec::from_memory(256);
  EXPECT_DOUBLE_EQ(r.cpu_cores, 0.2);
  EXPECT_DOUBLE_EQ(r.bandwidth_bps(), 80e6);
}

TEST(ContainerStateTest, RecyclableOnlyWhenQuiet) {
  ContainerState st;
  st.slots.resize(2);
  st.keepalive_deadline = from_seconds(10);
  EXPECT_FALSE(is_recyclable(st, from_seconds(5)));
  EXPECT_TRUE(is_recyclable(st, from_seconds(11)));
  st.slots[1].running = true;
  EXPECT_FALSE(is_recyclable(st, from_seconds(11)));
  st.slots[1].running = false;
  st.slots[0].blocked_until = from_seconds(12);
  EXPECT_FALSE(is_recyclable(st, from_seconds(11)));
  EXPECT_EQ(st.idle_slot(from_seconds(11)), 1u);
  st.slots[0].blocked_until = kZeroTime;
  auto h = std::make_shared<ConnectorHandle>();
  st.open_flows.push_back(h);
  EXPECT_FALSE(is_recyclable(st, from_seconds(11)));
  h->end_acked = true;
  st.prune_flows();
  EXPECT_TRUE(st.open_flows.empty());
  st.dlu_queue.emplace_back();
  EXPECT_FALSE(is_recyclable(st, from_seconds(11)));
}

// Engine on one node of a two-function workflow, built by hand.
struct EngineFixture : ::testing::Test {
  std::filesystem::path root = make_temp_dir("flowrt-engine-test");
  ClusterConfig cluster = ClusterConfig::single_node();
  WorkflowDefinition def = make_chain(2, 1 << 20);
  Placement placement = plan_placement(def, cluster);
  EventLoop loop;
  DataPlane plane{loop};
  DataSink sink{"n0", loop, {from_seconds(30), root}};
  LocalDataFlowGraph graph = project_local_graph(def, placement, cluster, "n0");
  RuntimeConfig rt;
  EventLog log{true};
  IdSource ids;
  std::unique_ptr<NodeEngine> engine;

  void SetUp() override {
    sink.configure(def, graph);
    plane.attach_sink("n0", &sink);
    engine = std::make_unique<NodeEngine>(cluster.nodes[0], def, placement, graph, loop, plane,
                                          sink, rt, log, ids);
  }
  void TearDown() override {
    engine.reset();
    std::filesystem::remove_all(root);
  }
};

TEST_F(EngineFixture, IgnoresNonPositivePressure) {
  Container& c = engine->add_container("f0");
  BlockSignal s{"f0", c.id(), 0, -0.5, kZeroTime};
  EXPECT_FALSE(engine->handle_block_signal(s));
  EXPECT_EQ(engine->counters().ignored_signals, 1u);
  EXPECT_EQ(c.state().slots[0].status(kZeroTime), SlotStatus::kIdle);
}

TEST_F(EngineFixture, PositivePressureBlocksSlot) {
  Container& c = engine->add_container("f0");
  BlockSignal s{"f0", c.id(), 0, 0.25, kZeroTime};
  // Nothing is queued, so no container is added.
  EXPECT_FALSE(engine->handle_block_signal(s));
  EXPECT_EQ(c.state().slots[0].status(from_millis(100)), SlotStatus::kBlocked);
  EXPECT_EQ(c.state().slots[0].status(from_millis(250)), SlotStatus::kIdle);
  EXPECT_EQ(log.of_kind("BLOCK").size(), 1u);
}

TEST_F(EngineFixture, KeepaliveRecyclesIdleContainers) {
  Container& c = engine->add_container("f0");
  auto deadline = c.state().keepalive_deadline;
  EXPECT_TRUE(engine->keepalive_sweep(deadline).empty());
  auto ids_out = engine->keepalive_sweep(deadline + Nanos{1});
  ASSERT_EQ(ids_out.size(), 1u);
  EXPECT_EQ(ids_out[0], c.id());
  EXPECT_TRUE(c.state().recycled);
  EXPECT_EQ(engine->live_containers("f0"), 0u);
  EXPECT_TRUE(engine->keepalive_sweep(deadline + from_seconds(1)).empty());
}

TEST_F(EngineFixture, RedoPlans) {
  RequestId req = RequestId::from_words(1, 2);
  FaultReport r;
  r.kind = FaultReport::Kind::kTransfer;
  r.request = req;
  r.function = "f0";
  EXPECT_TRUE(engine->plan_redo(req, r).retry);

  auto h = plane.open_connector({req, make_flow_id("f0", "d0", "f1")}, "n0", "n0", 1 << 20);
  plane.load(*h, Payload(Bytes(1 << 20, 1)));
  plane.send_next(*h);
  r.connector = h;
  auto plan = engine->plan_redo(req, r);
  ASSERT_EQ(plan.frontier.size(), 1u);
  EXPECT_TRUE(plan.reexecute.empty());

  plane.purge_retention(*h);
  try {
    engine->plan_redo(req, r);
    FAIL() << "no lineage, yet a plan was produced";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kUnrecoverable);
  }
}

TEST_F(EngineFixture, ContainerRejectsBusyAndUnknownData) {
  Container& c = engine->add_container("f0");
  RequestId req = RequestId::from_words(3, 3);
  InputBundle in = {{"input", Payload(Bytes(100, 'a'))}};
  c.invoke_flu(req, in);
  try {
    c.invoke_flu(req, in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kNoIdleSlot);
  }
  try {
    c.dlu_send(req, "nope", Payload());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kUnknownData);
  }
}

TEST(EngineRun, PressureDrivesScaling) {
  ClusterConfig cfg = ClusterConfig::three_node();
  WorkloadSpec w;
  w.workflow = make_wordcount(4);
  w.pattern = LoadPattern::closed(4, from_seconds(20));
  w.input_size = 8 * 1024 * 1024;
  auto placement = plan_placement(w.workflow, cfg);
  auto aware = run_dataflow(cfg, w, placement);
  EXPECT_GT(aware.engines.scale_pressure, 0u);
  EXPECT_GT(aware.engines.block_signals, 0u);
  for (const auto& d : aware.decisions)
    if (d.reason == ScaleReason::kPressure) EXPECT_TRUE(d.signal);

  cfg.runtime.pressure_aware = false;
  auto blind = run_dataflow(cfg, w, placement);
  EXPECT_EQ(blind.engines.scale_pressure, 0u);
  EXPECT_EQ(blind.engines.ignored_signals, blind.engines.block_signals);
}

TEST(EngineRun, ShortKeepaliveRecyclesAfterLoad) {
  ClusterConfig cfg = ClusterConfig::three_node();
  cfg.runtime.keepalive = from_seconds(5);
  cfg.runtime.keepalive_sweep_interval = from_seconds(1);
  auto def = make_chain(3, 4096);
  DataflowCluster cluster(cfg, def, plan_placement(def, cfg));
  std::size_t done = 0;
  cluster.on_finish([&](const RequestRecord& r) { done += r.completed(); });
  cluster.start();
  cluster.submit(0, RequestId::from_words(0, 1), Payload(Bytes(4096, 'a')));
  cluster.loop().run_until(from_seconds(30));
  cluster.stop();
  EXPECT_EQ(done, 1u);
  std::size_t recycled = 0;
  for (const auto& l : cluster.lifetimes()) {
    ASSERT_TRUE(l.recycled_at) << l.function;
    EXPECT_GT(*l.recycled_at - l.created_at, from_seconds(5));
    ++recycled;
  }
  EXPECT_EQ(recycled, 3u);
  EXPECT_EQ(cluster.log().of_kind("RECYCLE").size(), 3u);
}

TEST(EngineRun, FluFaultReexecutes) {
  ClusterConfig cfg = ClusterConfig::three_node();
  FaultSpec f;
  f.kind = FaultKind::kFluFault;
  f.request_index = 0;
  f.source = "count1";
  f.at_fraction = 0.5;
  cfg.faults = {f};
  WorkloadSpec w;
  w.workflow = make_wordcount(4);
  w.pattern = LoadPattern::open(1, from_seconds(1));
  w.input_size = 1 << 20;
  w.keep_outputs = true;
  RunOptions o;
  o.verify_outputs = true;
  auto r = run_dataflow(cfg, w, plan_placement(w.workflow, cfg), o);
  EXPECT_EQ(r.metrics.completed, 1u);
  EXPECT_EQ(r.output_mismatches, 0u);
  EXPECT_GE(r.engines.redos, 1u);
  EXPECT_EQ(r.sinks.duplicate_deliveries, 0u);
}

}  // namespace
}  // namespace flowrt
