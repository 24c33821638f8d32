// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "flowrt/common/clock.hpp"
#include "flowrt/common/crc32.hpp"
#include "flowrt/harness/catalog.hpp"
#include "flowrt/harness/cluster.hpp"
#include "flowrt/sink/data_sink.hpp"
#include "flowrt/wire/frame.hpp"
#include "flowrt/wire/token_bucket.hpp"
#include "flowrt/workflow/placement.hpp"
#include "flowrt/workflow/transforms.hpp"

using namespace flowrt;

namespace {

FlowChunk chunk_of(std::size_t n) {
  FlowChunk c;
  c.request_id = RequestId::from_words(1, 2);
  c.flow_id = FlowId{3};
  c.flags = kFlagData;
  c.payload = Payload(Bytes(n, 0x42));
  return c;
}

void BM_EncodeFrame(benchmark::State& state) {
  auto c = chunk_of(static_cast<std::size_t>(state.range(0)));
  Bytes out;
  for (auto _ : state) {
    encode_frame_into(c, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EncodeFrame)->Arg(64)->Arg(4096)->Arg(kChunkSize);

void BM_DecodeFrame(benchmark::State& state) {
  auto wire = encode_frame(chunk_of(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(decode_frame(wire));
  state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DecodeFrame)->Arg(64)->Arg(4096)->Arg(kChunkSize);

void BM_Crc32(benchmark::State& state) {
  Bytes b(static_cast<std::size_t>(state.range(0)), 0x17);
  for (auto _ : state) benchmark::DoNotOptimize(crc32(b));
  state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Crc32)->Arg(kChunkSize)->Arg(1 << 22);

void BM_TokenBucketAcquire(benchmark::State& state) {
  TokenBucket b(40e6, kChunkSize * 8);
  Nanos now{0};
  for (auto _ : state) {
    now += from_millis(1);
    benchmark::DoNotOptimize(b.acquire(kChunkSize * 8, now));
  }
}
BENCHMARK(BM_TokenBucketAcquire);

void BM_WordCount(benchmark::State& state) {
  FunctionSpec f;
  f.compute.transform = TransformKind::kWordCount;
  f.declared_inputs = {"in"};
  InputBundle in = {{"in", Payload(generate_input(1, 0, 1 << 20))}};
  for (auto _ : state) benchmark::DoNotOptimize(apply_transform(f, in));
  state.SetBytesProcessed(state.iterations() * (1 << 20));
}
BENCHMARK(BM_WordCount);

void BM_SinkPutTake(benchmark::State& state) {
  ManualClock clock;
  auto root = make_temp_dir("flowrt-bench");
  DataSink sink("n0", clock, {from_seconds(30), root});
  FlowId flow = make_flow_id("a", "d", "b");
  sink.register_function("b", {"d"});
  sink.register_flow(flow, "b", "d");
  Payload payload(Bytes(static_cast<std::size_t>(state.range(0)), 1));
  std::uint64_t n = 0;
  for (auto _ : state) {
    auto req = RequestId::from_words(0, n++);
    for (const auto& c : chunk_payload(req, flow, payload)) sink.put(c);
    benchmark::DoNotOptimize(sink.take(req, "b", 1));
    sink.release_request(req);
    sink.forget_request(req);
  }
  state.SetBytesProcessed(state.iterations() * state.range(0));
  std::filesystem::remove_all(root);
}
BENCHMARK(BM_SinkPutTake)->Arg(4096)->Arg(1 << 20);

void BM_SimulatedWordcount(benchmark::State& state) {
  ClusterConfig cfg = ClusterConfig::three_node();
  WorkloadSpec w;
  w.workflow = make_wordcount(4);
  w.pattern = LoadPattern::closed(4, from_seconds(10));
  w.input_size = 1 << 20;
  auto placement = plan_placement(w.workflow, cfg);
  RunOptions o;
  o.event_log = false;
  std::size_t completed = 0;
  for (auto _ : state) completed += run_dataflow(cfg, w, placement, o).metrics.completed;
  state.counters["requests"] =
      benchmark::Counter(static_cast<double>(completed), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_SimulatedWordcount)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
