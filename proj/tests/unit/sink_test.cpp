// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <fstream>

#include "flowrt/common/clock.hpp"
#include "flowrt/common/error.hpp"
#include "flowrt/sink/data_sink.hpp"
#include "flowrt/sink/spill_store.hpp"
#include "flowrt/wire/frame.hpp"
#include "support/oracles.hpp"

namespace flowrt {
namespace {

using testing::TestRng;

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return Errc::kInvalidArgument;
}

struct SinkFixture : ::testing::Test {
  ManualClock clock;
  std::filesystem::path root =
      std::filesystem::temp_directory_path() /
      ("flowrt-sink-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
       std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
  DataSink sink{"n0", clock, {from_seconds(30), root}};
  RequestId req = RequestId::from_words(1, 1);
  FlowId fx = make_flow_id("a", "x", "join");
  FlowId fy = make_flow_id("b", "y", "join");
  std::vector<std::pair<RequestId, FunctionName>> ready;

  void SetUp() override {
    sink.register_function("join", {"x", "y"});
    sink.register_flow(fx, "join", "x");
    sink.register_flow(fy, "join", "y");
    sink.set_ready_listener(
        [&](const RequestId& r, const FunctionName& f) { ready.emplace_back(r, f); });
  }
  void TearDown() override { std::filesystem::remove_all(root); }

  std::vector<FlowChunk> chunks(FlowId flow, std::size_t n, std::uint8_t fill = 7) {
    return chunk_payload(req, flow, Payload(Bytes(n, fill)));
  }
};

TEST_F(SinkFixture, ReadinessNeedsEveryInput) {
  for (auto& c : chunks(fx, 100)) EXPECT_EQ(sink.put(c), MatchStatus::kDataComplete);
  EXPECT_FALSE(sink.is_ready(req, "join"));
  EXPECT_EQ(code_of([&] { sink.take(req, "join", 1); }), Errc::kNotReady);
  EXPECT_EQ(sink.stats().misses, 1u);
  auto ys = chunks(fy, 3 * kChunkSize);
  for (std::size_t i = 0; i + 1 < ys.size(); ++i) EXPECT_EQ(sink.put(ys[i]), MatchStatus::kPartial);
  EXPECT_EQ(sink.put(ys.back()), MatchStatus::kFunctionReady);
  ASSERT_EQ(ready.size(), 1u);
  auto in = sink.take(req, "join", 1);
  EXPECT_EQ(in.at("x").size(), 100u);
  EXPECT_EQ(in.at("y").size(), 3 * kChunkSize);
  EXPECT_EQ(code_of([&] { sink.take(req, "join", 2); }), Errc::kAlreadyTaken);
  EXPECT_EQ(sink.stats().hits, 1u);
}

TEST_F(SinkFixture, OutOfOrderAndDuplicateChunks) {
  auto xs = chunks(fx, 4 * kChunkSize);
  TestRng rng(5);
  std::vector<FlowChunk> shuffled = xs;
  for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
  for (const auto& c : shuffled) sink.put(c);
  sink.put(xs[1]);
  sink.put(xs[3]);
  EXPECT_TRUE(sink.flow_complete({req, fx}));
  EXPECT_EQ(sink.acked_seq({req, fx}), 3u);
  EXPECT_EQ(sink.stats().duplicate_chunks, 2u);
  auto info = sink.inspect({req, "join", "x"});
  ASSERT_TRUE(info);
  EXPECT_EQ(info->size, 4 * kChunkSize);
  EXPECT_TRUE(info->complete);
}

TEST_F(SinkFixture, AckedSeqIsContiguousPrefix) {
  auto xs = chunks(fx, 4 * kChunkSize);
  sink.put(xs[0]);
  sink.put(xs[2]);
  EXPECT_EQ(sink.acked_seq({req, fx}), 0u);
  sink.put(xs[1]);
  EXPECT_EQ(sink.acked_seq({req, fx}), 2u);
}

TEST_F(SinkFixture, UnknownFlowIgnored) {
  auto c = chunks(make_flow_id("q", "q", "q"), 10);
  sink.put(c[0]);
  EXPECT_EQ(sink.stats().unknown_flow_chunks, 1u);
  EXPECT_EQ(sink.entry_count(), 0u);
}

TEST_F(SinkFixture, ProactiveReleaseAfterTake) {
  for (auto& c : chunks(fx, 1000)) sink.put(c);
  EXPECT_EQ(code_of([&] { sink.proactive_release(req, "join", "x"); }), Errc::kStillNeeded);
  for (auto& c : chunks(fy, 500)) sink.put(c);
  EXPECT_EQ(sink.stats().resident_bytes, 1500u);
  sink.take(req, "join", 1);
  EXPECT_EQ(sink.proactive_release(req, "join", "x"), 1000u);
  EXPECT_EQ(sink.stats().resident_bytes, 500u);
  EXPECT_EQ(sink.release_request(req), 500u);
  EXPECT_EQ(sink.stats().resident_bytes, 0u);
  EXPECT_EQ(sink.entry_count(), 0u);
}

TEST_F(SinkFixture, ByteSecondsIntegrateResidency) {
  for (auto& c : chunks(fx, 1000)) sink.put(c);
  clock.advance(from_seconds(2));
  for (auto& c : chunks(fy, 3000)) sink.put(c);
  clock.advance(from_seconds(1));
  sink.take(req, "join", 1);
  sink.release_request(req);
  clock.advance(from_seconds(5));
  // 1000 B for 3 s plus 3000 B for 1 s.
  EXPECT_DOUBLE_EQ(sink.stats().byte_seconds, 6000.0);
}

TEST_F(SinkFixture, ExpiredEntriesSpillAndReload) {
  auto xs = chunks(fx, 2 * kChunkSize, 0x33);
  for (auto& c : xs) sink.put(c);
  clock.advance(from_seconds(29));
  EXPECT_TRUE(sink.expire_sweep(clock.now()).empty());
  clock.advance(from_seconds(2));
  auto spilled = sink.expire_sweep(clock.now());
  ASSERT_EQ(spilled.size(), 1u);
  EXPECT_EQ(spilled[0].data, "x");
  auto st = sink.stats();
  EXPECT_EQ(st.resident_bytes, 0u);
  EXPECT_EQ(st.spilled_bytes, 2 * kChunkSize);
  EXPECT_EQ(sink.inspect({req, "join", "x"})->location, Location::kSpilled);

  for (auto& c : chunks(fy, 10)) sink.put(c);
  auto in = sink.take(req, "join", 1);
  EXPECT_EQ(in.at("x"), Payload(Bytes(2 * kChunkSize, 0x33)));
  EXPECT_EQ(sink.stats().spill_reloads, 1u);
}

TEST_F(SinkFixture, IncompleteEntriesDoNotSpill) {
  auto xs = chunks(fx, 2 * kChunkSize);
  sink.put(xs[0]);
  clock.advance(from_seconds(60));
  EXPECT_TRUE(sink.expire_sweep(clock.now()).empty());
}

TEST_F(SinkFixture, CheckpointsStored) {
  Checkpoint cp{req, fx, 4, from_seconds(1)};
  sink.store_checkpoint(cp);
  EXPECT_EQ(sink.load_checkpoint({req, fx}), cp);
  EXPECT_FALSE(sink.load_checkpoint({req, fy}));
}

TEST(SpillStoreTest, RoundTripAndCorruption) {
  auto root = std::filesystem::temp_directory_path() / "flowrt-spill-test";
  std::filesystem::remove_all(root);
  SpillStore store(root);
  TestRng rng(2);
  auto bytes = rng.bytes(5000);
  store.write("fn", 0xabc, bytes);
  EXPECT_EQ(store.data_path("fn", 0xabc).parent_path().filename(), "fn");
  EXPECT_EQ(store.read("fn", 0xabc), Bytes(bytes.begin(), bytes.end()));
  {
    std::fstream f(store.data_path("fn", 0xabc), std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(10);
    f.put('\x00' + 1);
  }
  try {
    store.read("fn", 0xabc);
    if (bytes[10] != 1) FAIL() << "corruption not detected";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kSpillIo);
  }
  store.remove("fn", 0xabc);
  EXPECT_THROW(store.read("fn", 0xabc), Error);
  std::filesystem::remove_all(root);
}

}  // namespace
}  // namespace flowrt
