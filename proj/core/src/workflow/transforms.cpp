// SPDX-License-Identifier: Apache-2.0
#include "flowrt/workflow/transforms.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <span>
#include <bit>
#include <string_view>

#include "flowrt/common/crc32.hpp"
#include "flowrt/common/error.hpp"
#include "flowrt/common/hash.hpp"

namespace flowrt {

std::uint64_t load_u64_be(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | p[i];
  return v;
}

void store_u64_be(std::uint8_t* p, std::uint64_t v) {
  for (int i = 7; i >= 0; --i) {
    p[i] = static_cast<std::uint8_t>(v);
    v >>= 8;
  }
}

namespace {

// Inputs in declared order, then any undeclared extras in name order.
std::vector<Payload> ordered(const FunctionSpec& fn, const InputBundle& inputs) {
  std::vector<Payload> out;
  for (const auto& name : fn.declared_inputs) {
    auto it = inputs.find(name);
    if (it != inputs.end()) out.push_back(it->second);
  }
  for (const auto& [name, p] : inputs) {
    if (std::find(fn.declared_inputs.begin(), fn.declared_inputs.end(), name) ==
        fn.declared_inputs.end())
      out.push_back(p);
  }
  return out;
}

bool is_separator(std::uint8_t c) { return c == ' ' || c == '\n' || c == '\t' || c == '\r'; }

// 0x80 in every byte of `x` that is zero, 0 elsewhere.
inline std::uint64_t zero_bytes(std::uint64_t x) {
  constexpr std::uint64_t k7f = 0x7f7f7f7f7f7f7f7fULL;
  return ~(((x & k7f) + k7f) | x | k7f);
}

inline std::uint64_t separator_bytes(std::uint64_t x) {
  constexpr std::uint64_t k01 = 0x0101010101010101ULL;
  return zero_bytes(x ^ (k01 * ' ')) | zero_bytes(x ^ (k01 * '\n')) |
         zero_bytes(x ^ (k01 * '\t')) | zero_bytes(x ^ (k01 * '\r'));
}

// Word starts are non-separators preceded by a separator (or the start).
// Eight bytes at a time; the flag of each byte sits in its top bit.
std::uint64_t count_words(std::span<const std::uint8_t> v) {
  constexpr std::uint64_t k80 = 0x8080808080808080ULL;
  std::uint64_t words = 0;
  std::uint64_t prev_sep = 0x80;  // top bit of the byte before this block
  std::size_t i = 0;
  for (; i + 8 <= v.size(); i += 8) {
    std::uint64_t x;
    std::memcpy(&x, v.data() + i, 8);
    if constexpr (std::endian::native == std::endian::big) x = __builtin_bswap64(x);
    std::uint64_t sep = separator_bytes(x);
    std::uint64_t before = (sep << 8) | prev_sep;
    words += static_cast<std::uint64_t>(std::popcount(~sep & before & k80));
    prev_sep = sep >> 56;
  }
  bool in_sep = prev_sep != 0;
  for (; i < v.size(); ++i) {
    bool sep = is_separator(v[i]);
    if (!sep && in_sep) ++words;
    in_sep = sep;
  }
  return words;
}

Payload u64_payload(std::uint64_t v) {
  Bytes b(8);
  store_u64_be(b.data(), v);
  return Payload(std::move(b));
}

}  // namespace

Payload apply_transform(const FunctionSpec& fn, const InputBundle& inputs) {
  auto parts = ordered(fn, inputs);
  switch (fn.compute.transform) {
    case TransformKind::kConcat:
    case TransformKind::kSplit:
      if (parts.size() == 1) return parts.front();
      return concat(parts);
    case TransformKind::kWordCount: {
      std::uint64_t words = 0;
      for (const auto& p : parts) words += count_words(p.view());
      return u64_payload(words);
    }
    case TransformKind::kSum: {
      std::uint64_t total = 0;
      for (const auto& p : parts) {
        auto v = p.view();
        for (std::size_t i = 0; i + 8 <= v.size(); i += 8) total += load_u64_be(v.data() + i);
      }
      return u64_payload(total);
    }
    case TransformKind::kChecksum: {
      std::uint32_t crc = 0;
      for (const auto& p : parts) crc = crc32(p.view(), crc);
      Bytes b{static_cast<std::uint8_t>(crc >> 24), static_cast<std::uint8_t>(crc >> 16),
              static_cast<std::uint8_t>(crc >> 8), static_cast<std::uint8_t>(crc)};
      return Payload(std::move(b));
    }
    case TransformKind::kMix: {
      std::uint32_t crc = 0;
      for (const auto& p : parts) crc = crc32(p.view(), crc);
      SplitMix64 rng(crc);
      Bytes b(fn.compute.mix_bytes);
      std::size_t i = 0;
      while (i < b.size()) {
        std::uint64_t w = rng.next();
        for (int k = 0; k < 8 && i < b.size(); ++k, ++i) {
          b[i] = static_cast<std::uint8_t>(w);
          w >>= 8;
        }
      }
      return Payload(std::move(b));
    }
  }
  throw Error(Errc::kComputeFault, "unknown transform");
}

Payload route_payload(const FunctionSpec& fn, const Payload& output, std::size_t index,
                      std::size_t fanout) {
  if (fn.compute.transform != TransformKind::kSplit || fanout <= 1) return output;
  std::size_t n = output.size();
  std::size_t begin = index * n / fanout;
  std::size_t end = (index + 1) * n / fanout;
  return output.slice(begin, end - begin);
}

std::string select_label(const SwitchSelector& selector, const std::vector<std::string>& labels,
                         const Payload& output) {
  if (labels.empty()) throw Error(Errc::kAmbiguousSwitch, "switch has no labels");
  if (selector.kind == SwitchSelector::Kind::kConst) {
    if (std::find(labels.begin(), labels.end(), selector.label) == labels.end())
      throw Error(Errc::kAmbiguousSwitch, "selector label '" + selector.label + "' not on edge");
    return selector.label;
  }
  return labels[crc32(output.view()) % labels.size()];
}

std::uint64_t bundle_size(const InputBundle& inputs) {
  std::uint64_t total = 0;
  for (const auto& [name, p] : inputs) total += p.size();
  return total;
}

Bytes generate_input(std::uint64_t seed, std::uint64_t request_index, std::uint64_t size) {
  // Each entry is a word followed by a space, padded to 8 bytes so it can be
  // copied whole.
  static constexpr std::array<std::string_view, 16> kWords = {
      "alpha", "river", "stone", "cloud", "ember", "lumen", "maple", "quartz",
      "delta", "orbit", "cedar", "field", "north", "pixel", "tide",  "vapor"};
  static const auto kPadded = [] {
    std::array<std::array<char, 8>, 16> t{};
    for (std::size_t w = 0; w < kWords.size(); ++w) {
      t[w].fill(' ');
      std::memcpy(t[w].data(), kWords[w].data(), kWords[w].size());
    }
    return t;
  }();
  SplitMix64 rng(seed * 0x9E3779B97F4A7C15ULL ^ (request_index + 1));
  Bytes out(size + 8);
  std::size_t pos = 0;
  while (pos < size) {
    // One draw picks eight words; per word, the low nibble selects it and
    // the high nibble turns the trailing space into a newline 1 time in 16.
    std::uint64_t r = rng.next();
    for (int k = 0; k < 8 && pos < size; ++k, r >>= 8) {
      std::size_t w = r & 15;
      std::memcpy(out.data() + pos, kPadded[w].data(), 8);
      pos += kWords[w].size();
      if (((r >> 4) & 15) == 0) out[pos] = '\n';
      ++pos;
    }
  }
  out.resize(size);
  return out;
}

}  // namespace flowrt
