// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>

namespace flowrt {

using Nanos = std::chrono::nanoseconds;

// Wide accumulator for exact byte-nanosecond and bit-nanosecond sums.
__extension__ typedef __int128 Int128;
using NodeId = std::string;
using FunctionName = std::string;
using DataName = std::string;

inline constexpr Nanos kZeroTime{0};

inline Nanos from_seconds(double s) {
  return Nanos{static_cast<std::int64_t>(std::llround(s * 1e9))};
}
inline Nanos from_millis(double ms) { return from_seconds(ms / 1e3); }
inline double to_seconds(Nanos t) { return static_cast<double>(t.count()) / 1e9; }
inline double to_millis(Nanos t) { return static_cast<double>(t.count()) / 1e6; }

// 16-byte invocation identity.
struct RequestId {
  std::array<std::uint8_t, 16> bytes{};

  static RequestId from_words(std::uint64_t hi, std::uint64_t lo);
  std::uint64_t hi() const;
  std::uint64_t lo() const;
  std::string hex() const;

  friend bool operator==(const RequestId&, const RequestId&) = default;
  friend auto operator<=>(const RequestId&, const RequestId&) = default;
};

// 64-bit hash of (source function, data name, destination function).
struct FlowId {
  std::uint64_t value = 0;

  friend bool operator==(const FlowId&, const FlowId&) = default;
  friend auto operator<=>(const FlowId&, const FlowId&) = default;
};

struct FlowKey {
  RequestId request;
  FlowId flow;

  friend bool operator==(const FlowKey&, const FlowKey&) = default;
  friend auto operator<=>(const FlowKey&, const FlowKey&) = default;
};

// Name used as the source of externally injected request input.
inline const std::string kGatewaySource = "<gateway>";

FlowId make_flow_id(const FunctionName& source, const DataName& data,
                    const FunctionName& destination);

}  // namespace flowrt

template <>
struct std::hash<flowrt::RequestId> {
  std::size_t operator()(const flowrt::RequestId& id) const noexcept {
    return static_cast<std::size_t>(id.hi() * 0x9E3779B97F4A7C15ULL ^ id.lo());
  }
};

template <>
struct std::hash<flowrt::FlowKey> {
  std::size_t operator()(const flowrt::FlowKey& k) const noexcept {
    return std::hash<flowrt::RequestId>{}(k.request) ^
           static_cast<std::size_t>(k.flow.value * 0xC2B2AE3D27D4EB4FULL);
  }
};
