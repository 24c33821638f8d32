// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "flowrt/common/bytes.hpp"
#include "flowrt/common/cluster_config.hpp"
#include "flowrt/common/crc32.hpp"
#include "flowrt/common/error.hpp"
#include "flowrt/common/event_loop.hpp"
#include "flowrt/common/units.hpp"
#include "support/oracles.hpp"

namespace flowrt {
namespace {

using testing::TestRng;

TEST(Units, ParsesSizes) {
  EXPECT_EQ(parse_size("4MiB"), 4u * 1024 * 1024);
  EXPECT_EQ(parse_size("16KiB"), 16u * 1024);
  EXPECT_EQ(parse_size("500000"), 500000u);
  EXPECT_EQ(parse_size("5MB"), 5000000u);
  EXPECT_EQ(parse_size("2GiB"), 2ull << 30);
  EXPECT_FALSE(parse_size("lots"));
  EXPECT_FALSE(parse_size(""));
}

TEST(Units, ParsesDurationsAndRates) {
  EXPECT_EQ(parse_duration("120s"), from_seconds(120));
  EXPECT_EQ(parse_duration("2m"), from_seconds(120));
  EXPECT_EQ(parse_duration("500ms"), from_millis(500));
  EXPECT_EQ(parse_duration("1.5s"), from_millis(1500));
  EXPECT_EQ(parse_duration("3"), from_seconds(3));
  EXPECT_FALSE(parse_duration("soon"));
  EXPECT_EQ(parse_rate("10rpm"), 10.0);
  EXPECT_EQ(parse_rate("7.5"), 7.5);
  EXPECT_FALSE(parse_rate("fast"));
}

TEST(Units, TrimStripsWhitespace) {
  EXPECT_EQ(trim("  a b \t\n"), "a b");
  EXPECT_EQ(trim(""), "");
}

TEST(RequestIdTest, WordsAreBigEndianInBytes) {
  auto id = RequestId::from_words(0x0011223344556677ULL, 0x8899aabbccddeeffULL);
  EXPECT_EQ(id.bytes[0], 0x00);
  EXPECT_EQ(id.bytes[7], 0x77);
  EXPECT_EQ(id.bytes[8], 0x88);
  EXPECT_EQ(id.bytes[15], 0xff);
  EXPECT_EQ(id.hi(), 0x0011223344556677ULL);
  EXPECT_EQ(id.lo(), 0x8899aabbccddeeffULL);
  EXPECT_EQ(id.hex(), "00112233445566778899aabbccddeeff");
}

TEST(FlowIdTest, DependsOnEveryEndpoint) {
  auto a = make_flow_id("f", "d", "g");
  EXPECT_EQ(a, make_flow_id("f", "d", "g"));
  EXPECT_NE(a, make_flow_id("f", "d", "h"));
  EXPECT_NE(a, make_flow_id("f", "e", "g"));
  EXPECT_NE(a, make_flow_id("x", "d", "g"));
  // Field boundaries matter: ("ab","c") differs from ("a","bc").
  EXPECT_NE(make_flow_id("ab", "c", "g"), make_flow_id("a", "bc", "g"));
}

TEST(Crc32, MatchesBitwiseReference) {
  TestRng rng(7);
  for (int i = 0; i < 200; ++i) {
    auto b = rng.bytes(rng.below(5000));
    EXPECT_EQ(crc32(b), testing::crc32_bitwise(b));
  }
  std::string check = "123456789";
  EXPECT_EQ(crc32({reinterpret_cast<const std::uint8_t*>(check.data()), check.size()}),
            0xCBF43926u);
}

TEST(Crc32, SeedChainsAcrossPieces) {
  TestRng rng(8);
  auto b = rng.bytes(1000);
  std::span<const std::uint8_t> all(b);
  EXPECT_EQ(crc32(all.subspan(300), crc32(all.first(300))), crc32(all));
}

TEST(PayloadTest, SliceSharesAndCompares) {
  Payload p = Payload::from_string("hello world");
  Payload s = p.slice(6, 5);
  EXPECT_EQ(s, Payload::from_string("world"));
  EXPECT_EQ(s.size(), 5u);
  EXPECT_EQ(s.view().data(), p.view().data() + 6);
  std::vector<Payload> parts = {p.slice(0, 5), Payload::from_string("!")};
  EXPECT_EQ(concat(parts), Payload::from_string("hello!"));
  EXPECT_TRUE(Payload().empty());
}

TEST(EventLoopTest, RunsInTimeThenSchedulingOrder) {
  EventLoop loop;
  std::vector<int> order;
  loop.schedule_at(from_millis(5), [&] { order.push_back(2); });
  loop.schedule_at(from_millis(1), [&] { order.push_back(0); });
  loop.schedule_at(from_millis(5), [&] { order.push_back(3); });
  loop.schedule_at(from_millis(1), [&] {
    order.push_back(1);
    loop.schedule_after(kZeroTime, [&] { order.push_back(10); });
  });
  EXPECT_EQ(loop.next_at(), from_millis(1));
  loop.run();
  EXPECT_EQ(order, (std::vector<int>{0, 1, 10, 2, 3}));
  EXPECT_EQ(loop.now(), from_millis(5));
  EXPECT_EQ(loop.executed(), 5u);
  EXPECT_FALSE(loop.next_at());
}

TEST(EventLoopTest, RunUntilStopsAtDeadline) {
  EventLoop loop;
  int ran = 0;
  loop.schedule_at(from_seconds(1), [&] { ++ran; });
  loop.schedule_at(from_seconds(3), [&] { ++ran; });
  loop.run_until(from_seconds(2));
  EXPECT_EQ(ran, 1);
  EXPECT_EQ(loop.now(), from_seconds(2));
  EXPECT_EQ(loop.pending(), 1u);
}

TEST(ClusterConfigTest, TemplatesAndValidation) {
  auto c = ClusterConfig::three_node();
  ASSERT_EQ(c.nodes.size(), 3u);
  EXPECT_TRUE(c.has_node("n2"));
  EXPECT_FALSE(c.has_node("n3"));
  EXPECT_NO_THROW(c.validate());
  c.nodes[1].id = "n0";
  try {
    c.validate();
    FAIL() << "duplicate node accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kConfig);
  }
  ClusterConfig empty;
  EXPECT_THROW(empty.validate(), Error);
}

}  // namespace
}  // namespace flowrt
