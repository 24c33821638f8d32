// SPDX-License-Identifier: Apache-2.0
#include "flowrt/common/crc32.hpp"

#include <zlib.h>

#include <algorithm>
#include <limits>

namespace flowrt {

std::uint32_t crc32(std::span<const std::uint8_t> bytes,
                    std::uint32_t seed) noexcept {
  uLong crc = seed;
  const auto* p = bytes.data();
  std::size_t left = bytes.size();
  while (left > 0) {
    auto n = static_cast<uInt>(
        std::min<std::size_t>(left, std::numeric_limits<uInt>::max()));
    crc = ::crc32(crc, p, n);
    p += n;
    left -= n;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace flowrt
