// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "flowrt/common/error.hpp"
#include "flowrt/harness/catalog.hpp"
#include "flowrt/harness/oracle.hpp"
#include "flowrt/workflow/transforms.hpp"
#include "support/oracles.hpp"

namespace flowrt {
namespace {

using testing::TestRng;

FunctionSpec fn_of(TransformKind t, std::vector<DataName> inputs = {"in"}) {
  FunctionSpec f;
  f.name = "f";
  f.compute.transform = t;
  f.declared_inputs = std::move(inputs);
  return f;
}

std::uint64_t word_count(const Payload& p) {
  auto f = fn_of(TransformKind::kWordCount);
  auto out = apply_transform(f, {{"in", p}});
  EXPECT_EQ(out.size(), 8u);
  return testing::get_be(out.view(), 0, 8);
}

TEST(Transforms, WordCountMatchesNaiveOnRandomText) {
  TestRng rng(101);
  const std::string alphabet = "ab \n\t\rxyz";
  for (int i = 0; i < 2000; ++i) {
    std::size_t n = rng.below(200);
    Bytes b(n);
    for (auto& c : b)
      c = rng.chance(0.1) ? static_cast<std::uint8_t>(rng.next())
                          : static_cast<std::uint8_t>(alphabet[rng.below(alphabet.size())]);
    Payload p(b);
    ASSERT_EQ(word_count(p), testing::count_words_naive(b)) << "case " << i;
    // Unaligned views exercise the block boundaries.
    if (n > 3) {
      auto s = p.slice(3, n - 3);
      ASSERT_EQ(word_count(s), testing::count_words_naive(s.view()));
    }
  }
}

TEST(Transforms, WordCountEdgeCases) {
  EXPECT_EQ(word_count(Payload()), 0u);
  EXPECT_EQ(word_count(Payload::from_string("        ")), 0u);
  EXPECT_EQ(word_count(Payload::from_string("one")), 1u);
  EXPECT_EQ(word_count(Payload::from_string("abcdefgh ijklmnop")), 2u);
  EXPECT_EQ(word_count(Payload::from_string("abcdefg\nhijklmnop q")), 3u);
}

TEST(Transforms, GeneratedInputIsDeterministicText) {
  auto a = generate_input(5, 3, 100000);
  EXPECT_EQ(a, generate_input(5, 3, 100000));
  EXPECT_NE(a, generate_input(5, 4, 100000));
  EXPECT_EQ(a.size(), 100000u);
  std::size_t newlines = 0;
  for (auto c : a) {
    ASSERT_TRUE((c >= 'a' && c <= 'z') || c == ' ' || c == '\n');
    newlines += c == '\n';
  }
  // About one separator in 16 is a newline; words average ~6 bytes.
  double per_byte = static_cast<double>(newlines) / static_cast<double>(a.size());
  EXPECT_GT(per_byte, 0.005);
  EXPECT_LT(per_byte, 0.02);
  EXPECT_TRUE(generate_input(1, 0, 0).empty());
  EXPECT_EQ(generate_input(1, 0, 3).size(), 3u);
}

TEST(Transforms, ConcatUsesDeclaredOrder) {
  auto f = fn_of(TransformKind::kConcat, {"z", "a"});
  InputBundle in = {{"a", Payload::from_string("A")},
                    {"z", Payload::from_string("Z")},
                    {"extra", Payload::from_string("E")}};
  EXPECT_EQ(apply_transform(f, in), Payload::from_string("ZAE"));
}

TEST(Transforms, SumAndChecksum) {
  Bytes words;
  testing::put_be(words, 5, 8);
  testing::put_be(words, 0xFFFFFFFFFFFFFFFFULL, 8);
  testing::put_be(words, 7, 8);
  auto sum = apply_transform(fn_of(TransformKind::kSum), {{"in", Payload(words)}});
  EXPECT_EQ(testing::get_be(sum.view(), 0, 8), 11u);  // wraps mod 2^64

  auto data = Payload::from_string("123456789");
  auto crc = apply_transform(fn_of(TransformKind::kChecksum), {{"in", data}});
  EXPECT_EQ(testing::get_be(crc.view(), 0, 4), 0xCBF43926u);
}

TEST(Transforms, MixIsSeededByInput) {
  auto f = fn_of(TransformKind::kMix);
  f.compute.mix_bytes = 1001;
  auto a = apply_transform(f, {{"in", Payload::from_string("x")}});
  EXPECT_EQ(a.size(), 1001u);
  EXPECT_EQ(a, apply_transform(f, {{"in", Payload::from_string("x")}}));
  EXPECT_NE(a, apply_transform(f, {{"in", Payload::from_string("y")}}));
}

TEST(Transforms, SplitPartitionsExactly) {
  auto f = fn_of(TransformKind::kSplit);
  TestRng rng(3);
  for (int i = 0; i < 200; ++i) {
    auto b = rng.bytes(rng.below(1000));
    Payload p(Bytes(b.begin(), b.end()));
    std::size_t k = 1 + rng.below(17);
    std::vector<Payload> parts;
    for (std::size_t j = 0; j < k; ++j) parts.push_back(route_payload(f, p, j, k));
    EXPECT_EQ(concat(parts), p);
    for (const auto& part : parts) EXPECT_LE(part.size(), p.size() / k + 1);
  }
  // Other transforms replicate.
  auto c = fn_of(TransformKind::kConcat);
  auto p = Payload::from_string("abc");
  EXPECT_EQ(route_payload(c, p, 1, 3), p);
}

TEST(Transforms, ComputeDurationScalesWithCores) {
  ComputeModel m;
  m.base_cpu_ms = 10;
  m.cost_ms_per_mib = 4;
  EXPECT_EQ(m.duration(1024 * 1024, 1.0), from_millis(14));
  EXPECT_EQ(m.duration(1024 * 1024, 0.1), from_millis(140));
}

TEST(Transforms, SelectLabel) {
  SwitchSelector s;
  s.kind = SwitchSelector::Kind::kConst;
  s.label = "b";
  std::vector<std::string> labels = {"a", "b"};
  EXPECT_EQ(select_label(s, labels, Payload()), "b");
  s.label = "c";
  EXPECT_THROW(select_label(s, labels, Payload()), Error);
  s.kind = SwitchSelector::Kind::kHash;
  auto p = Payload::from_string("123456789");
  EXPECT_EQ(select_label(s, labels, p), labels[0xCBF43926u % 2]);
}

TEST(Oracle, WordCountTotalsMatchNaiveCount) {
  for (std::size_t fan : {1u, 3u, 4u, 7u}) {
    auto def = make_wordcount(fan);
    auto input = generate_input(9, 0, 50000);
    auto gold = golden_run(def, Payload(input));
    ASSERT_EQ(gold.terminal_outputs.size(), 1u);
    const auto& out = gold.terminal_outputs.begin()->second;
    // The merge sums per-part counts; a word cut at a boundary counts twice
    // at most once per cut.
    std::uint64_t total = testing::get_be(out.view(), 0, 8);
    std::uint64_t whole = testing::count_words_naive(input);
    EXPECT_GE(total, whole);
    EXPECT_LE(total, whole + fan - 1);
    EXPECT_EQ(gold.inputs.size(), def.functions.size());
  }
}

}  // namespace
}  // namespace flowrt
