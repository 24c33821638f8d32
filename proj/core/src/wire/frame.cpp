// SPDX-License-Identifier: Apache-2.0
#include "flowrt/wire/frame.hpp"

#include "flowrt/common/crc32.hpp"
#include "flowrt/common/error.hpp"

namespace flowrt {

const char* to_string(FrameError e) noexcept {
  switch (e) {
    case FrameError::kBadMagic: return "BadMagic";
    case FrameError::kBadVersion: return "BadVersion";
    case FrameError::kBadFlags: return "BadFlags";
    case FrameError::kBadLength: return "BadLength";
    case FrameError::kBadCrc: return "BadCrc";
    case FrameError::kTruncatedFrame: return "TruncatedFrame";
  }
  return "FrameError";
}

namespace {

void put_be(std::uint8_t* p, std::uint64_t v, int width) {
  for (int i = width - 1; i >= 0; --i) {
    p[i] = static_cast<std::uint8_t>(v);
    v >>= 8;
  }
}

std::uint64_t get_be(const std::uint8_t* p, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v = (v << 8) | p[i];
  return v;
}

// Field offsets within the header.
constexpr std::size_t kOffMagic = 0;
constexpr std::size_t kOffVersion = 2;
constexpr std::size_t kOffFlags = 3;
constexpr std::size_t kOffRequest = 4;
constexpr std::size_t kOffFlow = 20;
constexpr std::size_t kOffSeq = 28;
constexpr std::size_t kOffLength = 36;
constexpr std::size_t kOffCrc = 40;
static_assert(kOffCrc + 4 == kFrameHeaderSize);

}  // namespace

void encode_frame_into(const FlowChunk& chunk, Bytes& out) {
  auto payload = chunk.payload.view();
  if (payload.size() > kChunkSize)
    throw Error(Errc::kInvalidArgument, "chunk payload exceeds chunk size");
  std::size_t base = out.size();
  out.resize(base + kFrameHeaderSize + payload.size());
  std::uint8_t* h = out.data() + base;
  put_be(h + kOffMagic, kFrameMagic, 2);
  h[kOffVersion] = kFrameVersion;
  h[kOffFlags] = chunk.flags;
  std::copy(chunk.request_id.bytes.begin(), chunk.request_id.bytes.end(), h + kOffRequest);
  put_be(h + kOffFlow, chunk.flow_id.value, 8);
  put_be(h + kOffSeq, chunk.seq, 8);
  put_be(h + kOffLength, payload.size(), 4);
  put_be(h + kOffCrc, crc32(payload), 4);
  std::copy(payload.begin(), payload.end(), h + kFrameHeaderSize);
}

Bytes encode_frame(const FlowChunk& chunk) {
  Bytes out;
  encode_frame_into(chunk, out);
  return out;
}

DecodeResult decode_frame(std::span<const std::uint8_t> b) {
  if (b.size() < 2) return FrameError::kTruncatedFrame;
  if (get_be(b.data() + kOffMagic, 2) != kFrameMagic) return FrameError::kBadMagic;
  if (b.size() < 3) return FrameError::kTruncatedFrame;
  if (b[kOffVersion] != kFrameVersion) return FrameError::kBadVersion;
  if (b.size() < kFrameHeaderSize) return FrameError::kTruncatedFrame;
  std::uint8_t flags = b[kOffFlags];
  if ((flags & ~kKnownFlags) != 0) return FrameError::kBadFlags;
  auto length = get_be(b.data() + kOffLength, 4);
  if (length > kChunkSize) return FrameError::kBadLength;
  std::size_t body = b.size() - kFrameHeaderSize;
  if (body < length) return FrameError::kTruncatedFrame;
  if (body > length) return FrameError::kBadLength;
  auto payload = b.subspan(kFrameHeaderSize, length);
  if (crc32(payload) != static_cast<std::uint32_t>(get_be(b.data() + kOffCrc, 4)))
    return FrameError::kBadCrc;

  FlowChunk c;
  std::copy(b.begin() + kOffRequest, b.begin() + kOffFlow, c.request_id.bytes.begin());
  c.flow_id.value = get_be(b.data() + kOffFlow, 8);
  c.seq = get_be(b.data() + kOffSeq, 8);
  c.flags = flags;
  c.payload = Payload::copy_of(payload);
  return c;
}

std::size_t chunk_count(std::size_t n) {
  if (n < kSmallDataThreshold) return 1;
  return (n + kChunkSize - 1) / kChunkSize;
}

std::vector<FlowChunk> chunk_payload(const RequestId& request, FlowId flow,
                                     const Payload& payload) {
  std::vector<FlowChunk> out;
  std::size_t n = payload.size();
  if (n < kSmallDataThreshold) {
    FlowChunk c{request, flow, 0,
                static_cast<std::uint8_t>(kFlagEnd | kFlagSmall | (n ? kFlagData : 0)),
                payload};
    out.push_back(std::move(c));
    return out;
  }
  std::size_t count = chunk_count(n);
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t off = i * kChunkSize;
    std::size_t len = std::min(kChunkSize, n - off);
    std::uint8_t flags = kFlagData | (i + 1 == count ? kFlagEnd : 0);
    out.push_back(FlowChunk{request, flow, i, flags, payload.slice(off, len)});
  }
  return out;
}

}  // namespace flowrt
