// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "flowrt/common/error.hpp"
#include "flowrt/harness/baseline.hpp"
#include "flowrt/harness/catalog.hpp"
#include "flowrt/harness/cluster.hpp"
#include "flowrt/harness/compare.hpp"
#include "flowrt/harness/config_file.hpp"
#include "flowrt/harness/load_driver.hpp"
#include "flowrt/harness/metrics.hpp"
#include "flowrt/workflow/placement.hpp"

namespace flowrt {
namespace {

WorkloadSpec spec_of(WorkflowDefinition def, LoadPattern pattern, std::uint64_t size) {
  WorkloadSpec w;
  w.workflow = std::move(def);
  w.pattern = pattern;
  w.input_size = size;
  return w;
}

TEST(Pattern, ParseAndFormat) {
  auto o = LoadPattern::parse("open:10:120s");
  EXPECT_EQ(o.kind, LoadPattern::Kind::kOpenLoop);
  EXPECT_DOUBLE_EQ(o.rpm, 10);
  EXPECT_EQ(o.duration, from_seconds(120));
  EXPECT_EQ(o.to_string(), "open:10rpm:120s");
  auto c = LoadPattern::parse("closed:8:1m");
  EXPECT_EQ(c.clients, 8u);
  EXPECT_EQ(c.duration, from_seconds(60));
  auto b = LoadPattern::parse("burst:10:100:30s");
  EXPECT_EQ(b.total_duration(), from_seconds(60));
  EXPECT_THROW(LoadPattern::parse("sideways:1:1"), Error);
  EXPECT_THROW(LoadPattern::parse("open:x:10s"), Error);
}

TEST(Driver, OpenLoopArrivalTimes) {
  EventLoop loop;
  WorkloadSpec w = spec_of(make_chain(1, 8), LoadPattern::open(30, from_seconds(10)), 8);
  std::vector<Nanos> at;
  LoadDriver d(loop, w, [&](std::uint64_t) { at.push_back(loop.now()); });
  d.start();
  loop.run();
  ASSERT_EQ(at.size(), 5u);
  for (std::size_t i = 0; i < at.size(); ++i) EXPECT_EQ(at[i], from_seconds(2.0 * i));
}

TEST(Driver, BurstDoublesRate) {
  EventLoop loop;
  WorkloadSpec w = spec_of(make_chain(1, 8), LoadPattern::burst(6, 60, from_seconds(10)), 8);
  std::size_t low = 0, high = 0;
  LoadDriver d(loop, w, [&](std::uint64_t) { (loop.now() < from_seconds(10) ? low : high)++; });
  d.start();
  loop.run();
  EXPECT_EQ(low, 1u);
  EXPECT_EQ(high, 10u);
}

TEST(Metrics, NearestRank) {
  std::vector<double> v = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  EXPECT_EQ(nearest_rank(v, 50), 5);
  EXPECT_EQ(nearest_rank(v, 95), 10);
  EXPECT_EQ(nearest_rank(v, 10), 1);
  EXPECT_EQ(nearest_rank({42}, 99), 42);
}

TEST(Metrics, GbSeconds) {
  std::vector<ContainerLifetime> l = {
      {1, "f", "n0", 1024, from_seconds(0), from_seconds(10)},
      {2, "f", "n0", 512, from_seconds(5), std::nullopt},
      {3, "f", "n0", 2048, from_seconds(0), from_seconds(100)},
  };
  // 1 GiB * 10 s + 0.5 GiB * 15 s + 2 GiB * 20 s (clipped at the end)
  EXPECT_DOUBLE_EQ(gb_seconds(l, from_seconds(20)), 10 + 7.5 + 40);
  EXPECT_EQ(peak_containers(l, from_seconds(20)), 3u);
}

TEST(Metrics, CsvAndJson) {
  RunMetrics m;
  m.mode = "dataflow";
  m.workflow = "wc";
  m.duration_s = 60;
  RequestRecord r;
  r.id = RequestId::from_words(0, 1);
  r.submit = from_seconds(1);
  r.start = from_seconds(1);
  r.end = from_millis(1500);
  m.requests.push_back(r);
  m.submitted = 1;
  m.summarize();
  EXPECT_EQ(m.completed, 1u);
  EXPECT_DOUBLE_EQ(m.p50_ms, 500);
  EXPECT_DOUBLE_EQ(m.throughput_rpm, 1);
  std::ostringstream csv;
  m.write_csv(csv);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "request_id,submit,start,end,latency_ms");
  std::ostringstream js;
  m.write_summary_json(js);
  auto j = nlohmann::json::parse(js.str());
  EXPECT_EQ(j["mode"], "dataflow");
  EXPECT_DOUBLE_EQ(j["latency_ms"]["p50"].get<double>(), 500);
}

TEST(Metrics, SummaryJsonRoundTrip) {
  RunMetrics m;
  m.mode = "controlflow";
  m.workflow = "wc";
  m.pattern = "closed:4:60s";
  m.seed = 3;
  m.input_size = 1024;
  m.completed = 10;
  m.throughput_rpm = 12.5;
  m.p99_ms = 321;
  m.container_gb_seconds = 4.25;
  auto path = make_temp_dir("flowrt-metrics") / "s.json";
  {
    std::ofstream f(path);
    m.write_summary_json(f);
  }
  auto back = read_summary_json(path.string());
  EXPECT_EQ(back.mode, m.mode);
  EXPECT_EQ(back.pattern, m.pattern);
  EXPECT_EQ(back.seed, 3u);
  EXPECT_EQ(back.completed, 10u);
  EXPECT_DOUBLE_EQ(back.throughput_rpm, 12.5);
  EXPECT_DOUBLE_EQ(back.p99_ms, 321);
  EXPECT_DOUBLE_EQ(back.container_gb_seconds, 4.25);
  std::filesystem::remove_all(path.parent_path());
}

TEST(ConfigFile, ParsesRuntimeAndFaults) {
  auto c = parse_cluster_config(R"({
    "nodes": [{"id": "a"}, {"id": "b", "cores": 8, "memory_mb": 1024}],
    "clock": "virtual",
    "runtime": {"alpha": 2, "sink_ttl": "10s", "cold_start": 0.25,
                "release_policy": "at_completion", "pressure_aware": false},
    "faults": [{"kind": "interrupt", "request": 3, "source": "start", "chunk": 2,
                "retention_lost": true}]
  })");
  ASSERT_EQ(c.nodes.size(), 2u);
  EXPECT_EQ(c.nodes[1].cores, 8);
  EXPECT_DOUBLE_EQ(c.runtime.alpha, 2);
  EXPECT_EQ(c.runtime.sink_ttl, from_seconds(10));
  EXPECT_EQ(c.runtime.cold_start, from_millis(250));
  EXPECT_EQ(c.runtime.release_policy, ReleasePolicy::kAtRequestCompletion);
  EXPECT_FALSE(c.runtime.pressure_aware);
  ASSERT_EQ(c.faults.size(), 1u);
  EXPECT_EQ(c.faults[0].request_index, 3u);
  EXPECT_EQ(c.faults[0].chunk_index, 2u);
  EXPECT_TRUE(c.faults[0].retention_lost);
  for (const char* bad : {"{}", "[1]", R"({"nodes": []})",
                          R"({"nodes": [{"id": "a"}], "clock": "sundial"})", "not json"}) {
    try {
      parse_cluster_config(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::kConfig) << bad;
    }
  }
}

TEST(Run, SameSeedSameEventLog) {
  ClusterConfig cfg = ClusterConfig::three_node();
  auto w = spec_of(make_wordcount(4), LoadPattern::open(20, from_seconds(15)), 256 * 1024);
  auto p = plan_placement(w.workflow, cfg);
  auto a = run_dataflow(cfg, w, p);
  auto b = run_dataflow(cfg, w, p);
  ASSERT_FALSE(a.events.empty());
  EXPECT_EQ(a.events, b.events);
  auto ca = run_controlflow(cfg, w, p);
  auto cb = run_controlflow(cfg, w, p);
  EXPECT_EQ(ca.events, cb.events);
  w.seed = 2;
  EXPECT_NE(run_dataflow(cfg, w, p).events, a.events);
}

TEST(Run, OpenLoopWordcountCompletesEverything) {
  ClusterConfig cfg = ClusterConfig::three_node();
  auto w = spec_of(make_wordcount(4), LoadPattern::open(10, from_seconds(120)), 4 << 20);
  RunOptions o;
  o.verify_outputs = true;
  o.event_log = false;
  auto r = run_dataflow(cfg, w, plan_placement(w.workflow, cfg), o);
  EXPECT_EQ(r.metrics.submitted, 20u);
  EXPECT_EQ(r.metrics.completed, 20u);
  EXPECT_EQ(r.metrics.timeouts, 0u);
  EXPECT_EQ(r.output_mismatches, 0u);
  EXPECT_GT(r.metrics.container_gb_seconds, 0.0);
  EXPECT_DOUBLE_EQ(r.metrics.container_gb_seconds,
                   gb_seconds(r.lifetimes, from_seconds(r.metrics.finished_at_s)));
}

TEST(Run, ClosedLoopObeysLittlesLaw) {
  ClusterConfig cfg = ClusterConfig::three_node();
  auto w = spec_of(make_wordcount(4), LoadPattern::closed(4, from_seconds(60)), 1 << 20);
  RunOptions o;
  o.event_log = false;
  auto r = run_dataflow(cfg, w, plan_placement(w.workflow, cfg), o);
  // clients = throughput x mean latency
  double n = r.metrics.throughput_rpm / 60.0 * r.metrics.mean_ms / 1000.0;
  EXPECT_NEAR(n, 4.0, 0.2);
}

TEST(Run, BaselineChainPaysStoreAndTriggers) {
  // Two stages moving 5 MB at 40 Mbps through the store: Put then Get, 1 s
  // each, plus a trigger per function.
  ClusterConfig cfg = ClusterConfig::three_node();
  auto def = make_chain(2, 5'000'000);
  for (auto& f : def.functions) {
    f.compute.base_cpu_ms = 10;  // 100 ms at 0.1 core
    f.compute.cost_ms_per_mib = 0;
  }
  auto w = spec_of(def, LoadPattern::open(1, from_seconds(1)), 1024);
  auto r = run_controlflow(cfg, w, plan_placement(def, cfg));
  ASSERT_EQ(r.metrics.completed, 1u);
  // Each bucket banks one 64 KiB burst while its function computes.
  double burst_ms = 65536.0 * 8 / 40e6 * 1e3;
  double ideal = 100 + 1000 + 1000 + 100 + 2 * 63;
  EXPECT_GE(r.metrics.requests[0].latency_ms(), 100 + 1000 + 1000 + 63);
  EXPECT_NEAR(r.metrics.requests[0].latency_ms(), ideal - 2 * burst_ms, 0.01);
  auto d = run_dataflow(cfg, w, plan_placement(def, cfg));
  EXPECT_LT(d.metrics.requests[0].latency_ms(), r.metrics.requests[0].latency_ms());
}

TEST(Compare, IdentityAndMismatch) {
  ClusterConfig cfg = ClusterConfig::three_node();
  auto w = spec_of(make_chain(3, 65536), LoadPattern::open(30, from_seconds(10)), 65536);
  RunOptions o;
  o.event_log = false;
  auto a = run_dataflow(cfg, w, plan_placement(w.workflow, cfg), o);
  auto rep = compare(a.metrics, a.metrics);
  EXPECT_DOUBLE_EQ(rep.throughput_ratio, 1.0);
  EXPECT_DOUBLE_EQ(rep.p50_ratio, 1.0);
  add_default_thresholds(rep, a.metrics, a.metrics);
  EXPECT_TRUE(rep.passed());
  std::ostringstream table;
  rep.write_table(table, a.metrics, a.metrics);
  EXPECT_NE(table.str().find("throughput"), std::string::npos);

  auto other = a.metrics;
  other.seed = 99;
  try {
    compare(a.metrics, other);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kMismatchedWorkloads);
  }
}

TEST(Cluster, SwitchRunsOneBranch) {
  ClusterConfig cfg = ClusterConfig::three_node();
  auto w = spec_of(make_switch3(65536), LoadPattern::open(6, from_seconds(10)), 4096);
  RunOptions o;
  o.verify_outputs = true;
  auto r = run_dataflow(cfg, w, plan_placement(w.workflow, cfg), o);
  EXPECT_EQ(r.metrics.completed, 1u);
  EXPECT_EQ(r.output_mismatches, 0u);
  std::size_t branches = 0;
  for (const auto& e : r.events)
    if (e.kind == "DISPATCH" && (e.function == "fa" || e.function == "fb" || e.function == "fc"))
      ++branches;
  EXPECT_EQ(branches, 1u);
}

}  // namespace
}  // namespace flowrt
