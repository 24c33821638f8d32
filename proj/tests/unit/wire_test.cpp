// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "flowrt/common/clock.hpp"
#include "flowrt/common/error.hpp"
#include "flowrt/sink/data_sink.hpp"
#include "flowrt/wire/dataplane.hpp"
#include "flowrt/wire/frame.hpp"
#include "flowrt/wire/token_bucket.hpp"
#include "support/oracles.hpp"

namespace flowrt {
namespace {

using testing::TestRng;

FlowChunk sample_chunk(std::size_t n = 10) {
  FlowChunk c;
  c.request_id = RequestId::from_words(1, 2);
  c.flow_id = FlowId{3};
  c.seq = 4;
  c.flags = kFlagData;
  c.payload = Payload(Bytes(n, 0x5a));
  return c;
}

FrameError error_of(const Bytes& b) {
  auto r = decode_frame(b);
  EXPECT_TRUE(std::holds_alternative<FrameError>(r));
  return std::holds_alternative<FrameError>(r) ? std::get<FrameError>(r) : FrameError::kBadMagic;
}

TEST(Frame, HeaderLayout) {
  auto wire = encode_frame(sample_chunk(3));
  ASSERT_EQ(wire.size(), kFrameHeaderSize + 3);
  EXPECT_EQ(testing::get_be(wire, 0, 2), 0xDF17u);
  EXPECT_EQ(wire[2], kFrameVersion);
  EXPECT_EQ(wire[3], kFlagData);
  EXPECT_EQ(testing::get_be(wire, 4, 8), 1u);
  EXPECT_EQ(testing::get_be(wire, 12, 8), 2u);
  EXPECT_EQ(testing::get_be(wire, 20, 8), 3u);
  EXPECT_EQ(testing::get_be(wire, 28, 8), 4u);
  EXPECT_EQ(testing::get_be(wire, 36, 4), 3u);
  EXPECT_EQ(testing::get_be(wire, 40, 4),
            testing::crc32_bitwise(std::span<const std::uint8_t>(wire).subspan(44)));
}

TEST(Frame, TypedErrors) {
  auto good = encode_frame(sample_chunk());
  auto b = good;
  b[0] ^= 1;
  EXPECT_EQ(error_of(b), FrameError::kBadMagic);
  b = good;
  b[2] = 2;
  EXPECT_EQ(error_of(b), FrameError::kBadVersion);
  b = good;
  b[3] = 0x08;
  EXPECT_EQ(error_of(b), FrameError::kBadFlags);
  b = good;
  b[kFrameHeaderSize] ^= 0xff;
  EXPECT_EQ(error_of(b), FrameError::kBadCrc);
  b = good;
  b.pop_back();
  EXPECT_EQ(error_of(b), FrameError::kTruncatedFrame);
  b = good;
  b.push_back(0);
  EXPECT_EQ(error_of(b), FrameError::kBadLength);
  b.assign(good.begin(), good.begin() + 20);
  EXPECT_EQ(error_of(b), FrameError::kTruncatedFrame);
  EXPECT_EQ(error_of(Bytes{}), FrameError::kTruncatedFrame);
}

TEST(Frame, OversizedPayloadRejected) {
  EXPECT_NO_THROW(encode_frame(sample_chunk(kChunkSize)));
  EXPECT_THROW(encode_frame(sample_chunk(kChunkSize + 1)), Error);
  // A header announcing more than a chunk is a length error.
  auto wire = encode_frame(sample_chunk(1));
  wire[36] = 0xff;
  EXPECT_EQ(error_of(wire), FrameError::kBadLength);
}

TEST(Frame, ChunkingCoversPayload) {
  TestRng rng(44);
  auto id = RequestId::from_words(9, 9);
  for (std::size_t n : {0ul, 1ul, kSmallDataThreshold - 1, kSmallDataThreshold, kChunkSize,
                        kChunkSize + 1, 3 * kChunkSize + 17}) {
    auto bytes = rng.bytes(n);
    Payload p(Bytes(bytes.begin(), bytes.end()));
    auto chunks = chunk_payload(id, FlowId{1}, p);
    ASSERT_EQ(chunks.size(), chunk_count(n)) << n;
    std::vector<Payload> parts;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      EXPECT_EQ(chunks[i].seq, i);
      EXPECT_EQ(chunks[i].is_end(), i + 1 == chunks.size());
      parts.push_back(chunks[i].payload);
    }
    EXPECT_EQ(concat(parts), p);
    if (n < kSmallDataThreshold) {
      EXPECT_EQ(chunks.size(), 1u);
      EXPECT_TRUE(chunks[0].is_small());
    } else {
      EXPECT_FALSE(chunks[0].is_small());
    }
  }
}

TEST(TokenBucketTest, ExactReleaseTimes) {
  TokenBucket b(40e6, 64 * 1024 * 8);
  // 5,000,000 bytes as 64 KiB pieces at 40 Mbps: the last one is released
  // after exactly 1 s.
  std::uint64_t bits = 5000000ull * 8;
  Nanos last{0};
  while (bits > 0) {
    std::uint64_t piece = std::min<std::uint64_t>(bits, 64 * 1024 * 8);
    last = b.acquire(piece, kZeroTime);
    bits -= piece;
  }
  EXPECT_EQ(last, from_seconds(1));
}

TEST(TokenBucketTest, RefillsAndCaps) {
  TokenBucket b(1000, 2000, true);
  EXPECT_DOUBLE_EQ(b.level_bits(kZeroTime), 2000.0);
  EXPECT_EQ(b.acquire(2000, kZeroTime), kZeroTime);
  EXPECT_DOUBLE_EQ(b.level_bits(from_millis(500)), 500.0);
  EXPECT_DOUBLE_EQ(b.level_bits(from_seconds(100)), 2000.0);  // capped at burst
  EXPECT_EQ(b.acquire(1000, from_millis(500)), from_millis(500));
  EXPECT_THROW(b.acquire(2001, from_seconds(10)), Error);
}

TEST(TokenBucketTest, QueuedAcquiresLineUp) {
  TokenBucket b(1000, 1000);
  EXPECT_EQ(b.acquire(1000, kZeroTime), from_seconds(1));
  // The second acquire waits behind the first.
  EXPECT_EQ(b.acquire(500, kZeroTime), from_millis(1500));
  EXPECT_EQ(b.acquire(500, from_seconds(1)), from_millis(1000));
}

TEST(TokenBucketTest, RandomScheduleNeverExceedsRate) {
  TestRng rng(77);
  TokenBucket b(40e6, 524288);
  b.enable_trace(true);
  Nanos now{0};
  std::uint64_t total = 0;
  for (int i = 0; i < 2000; ++i) {
    now += Nanos{static_cast<std::int64_t>(rng.below(3'000'000))};
    std::uint64_t bits = 1 + rng.below(524288);
    Nanos wait = b.acquire(bits, now);
    EXPECT_GE(wait.count(), 0);
    total += bits;
  }
  auto trace = b.trace();
  ASSERT_EQ(trace.size(), 2000u);
  // Releases are ordered and, from an empty start, never get ahead of the
  // rate: cumulative bits by time t are at most rate * t.
  std::uint64_t released = 0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (i > 0) EXPECT_GE(trace[i].at, trace[i - 1].at);
    released += trace[i].bits;
    EXPECT_LE(static_cast<double>(released), 40e6 * to_seconds(trace[i].at) + 1e-6);
  }
  EXPECT_EQ(released, total);
}

struct PlaneFixture : ::testing::Test {
  ManualClock clock;
  std::filesystem::path root = std::filesystem::temp_directory_path() / "flowrt-wire-test";
  DataSink sink0{"n0", clock, {from_seconds(30), root / "n0"}};
  DataSink sink1{"n1", clock, {from_seconds(30), root / "n1"}};
  DataPlane plane{clock};
  RequestId req = RequestId::from_words(5, 6);
  FlowId flow = make_flow_id("a", "d", "b");

  void SetUp() override {
    for (auto* s : {&sink0, &sink1}) {
      s->register_function("b", {"d"});
      s->register_flow(flow, "b", "d");
    }
    plane.attach_sink("n0", &sink0);
    plane.attach_sink("n1", &sink1);
  }
  void TearDown() override { std::filesystem::remove_all(root); }

  ConnectorPtr open(const NodeId& dst, std::size_t n) {
    auto h = plane.open_connector({req, flow}, "n0", dst, n);
    Bytes b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = static_cast<std::uint8_t>(i * 31);
    plane.load(*h, Payload(std::move(b)));
    return h;
  }
  void drain(ConnectorHandle& h) {
    while (h.next_seq < h.total_chunks()) plane.send_next(h);
  }
};

TEST_F(PlaneFixture, ConnectorKinds) {
  auto local = open("n0", 100000);
  EXPECT_EQ(local->kind, ConnectorKind::kLocal);
  EXPECT_FALSE(local->crosses_nodes());
  auto h = plane.open_connector({RequestId::from_words(7, 7), flow}, "n0", "n1", 100000);
  EXPECT_EQ(h->kind, ConnectorKind::kRemote);
  auto small = plane.open_connector({RequestId::from_words(8, 8), flow}, "n0", "n1", 100);
  EXPECT_EQ(small->kind, ConnectorKind::kSmall);
  // Opening again returns the same handle.
  EXPECT_EQ(plane.open_connector({req, flow}, "n0", "n0", 100000), local);
  auto c = plane.counters();
  EXPECT_EQ(c.local_connectors, 1u);
  EXPECT_EQ(c.remote_connectors, 1u);
  EXPECT_EQ(c.small_transfers, 1u);
}

TEST_F(PlaneFixture, RemoteTransferCompletesAndAcks) {
  auto h = open("n1", 200000);
  drain(*h);
  EXPECT_TRUE(h->end_acked);
  EXPECT_TRUE(sink1.is_ready(req, "b"));
  auto in = sink1.take(req, "b", 1);
  EXPECT_EQ(in.at("d").size(), 200000u);
  EXPECT_GT(plane.counters().frames_encoded, 0u);
}

TEST_F(PlaneFixture, SequenceGapRejected) {
  auto h = open("n1", 200000);
  plane.send_next(*h);
  try {
    plane.send_chunk(*h, h->retained[2]);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kSeqGap);
  }
}

TEST_F(PlaneFixture, InterruptReplayDeliversOnce) {
  int drops = 0;
  plane.set_interrupt_hook([&](ConnectorHandle&, const FlowChunk& c) {
    return c.seq == 2 && drops++ == 0;
  });
  auto h = open("n1", 5 * kChunkSize);
  plane.send_next(*h);
  plane.send_next(*h);
  auto cp = plane.checkpoint_flow(*h);
  EXPECT_EQ(cp.acked_seq, 1u);
  EXPECT_THROW(plane.send_next(*h), Error);
  EXPECT_TRUE(h->interrupted);
  EXPECT_THROW(plane.send_next(*h), Error);  // stays interrupted
  plane.replay_from(*h, cp);
  drain(*h);
  EXPECT_TRUE(h->end_acked);
  auto in = sink1.take(req, "b", 1);
  EXPECT_EQ(in.at("d").size(), 5 * kChunkSize);
  EXPECT_EQ(sink1.stats().duplicate_chunks, 0u);
  EXPECT_EQ(plane.counters().interrupts, 1u);
}

TEST_F(PlaneFixture, ReplayAfterLostRetentionFails) {
  auto h = open("n1", 3 * kChunkSize);
  plane.send_next(*h);
  auto cp = plane.checkpoint_flow(*h);
  plane.purge_retention(*h);
  try {
    plane.replay_from(*h, cp);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kRetentionLost);
  }
}

TEST_F(PlaneFixture, DownNodeUnreachable) {
  plane.set_node_down("n1", true);
  try {
    plane.open_connector({req, flow}, "n0", "n1", 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kNetworkUnreachable);
  }
  EXPECT_THROW(plane.open_connector({req, flow}, "n0", "n5", 10), Error);
}

}  // namespace
}  // namespace flowrt
