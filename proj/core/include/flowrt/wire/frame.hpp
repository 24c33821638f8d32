// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "flowrt/common/bytes.hpp"
#include "flowrt/common/types.hpp"

namespace flowrt {

inline constexpr std::uint16_t kFrameMagic = 0xDF17;
inline constexpr std::uint8_t kFrameVersion = 0x01;
inline constexpr std::size_t kFrameHeaderSize = 44;
inline constexpr std::size_t kChunkSize = 65536;
inline constexpr std::size_t kSmallDataThreshold = 16384;

enum ChunkFlags : std::uint8_t {
  kFlagData = 0x01,
  kFlagEnd = 0x02,
  kFlagSmall = 0x04,
};
inline constexpr std::uint8_t kKnownFlags = kFlagData | kFlagEnd | kFlagSmall;

struct FlowChunk {
  RequestId request_id;
  FlowId flow_id;
  std::uint64_t seq = 0;
  std::uint8_t flags = 0;
  Payload payload;

  bool is_end() const { return (flags & kFlagEnd) != 0; }
  bool is_small() const { return (flags & kFlagSmall) != 0; }
  FlowKey key() const { return {request_id, flow_id}; }

  friend bool operator==(const FlowChunk&, const FlowChunk&) = default;
};

enum class FrameError {
  kBadMagic,
  kBadVersion,
  kBadFlags,
  kBadLength,
  kBadCrc,
  kTruncatedFrame,
};

const char* to_string(FrameError e) noexcept;

using DecodeResult = std::variant<FlowChunk, FrameError>;

// Throws Error(kInvalidArgument) when the payload exceeds kChunkSize.
Bytes encode_frame(const FlowChunk& chunk);
void encode_frame_into(const FlowChunk& chunk, Bytes& out);

// Total: every input yields a chunk or a typed error. `bytes` must hold
// exactly one frame.
DecodeResult decode_frame(std::span<const std::uint8_t> bytes);

// Cuts one transfer into its chunk sequence: a single SMALL frame below
// kSmallDataThreshold, otherwise kChunkSize pieces with END on the last.
std::vector<FlowChunk> chunk_payload(const RequestId& request, FlowId flow,
                                     const Payload& payload);

std::size_t chunk_count(std::size_t payload_size);

}  // namespace flowrt
