// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>

namespace flowrt {

// IEEE CRC-32 (reflected polynomial 0xEDB88320), as used by zlib and PNG.
std::uint32_t crc32(std::span<const std::uint8_t> bytes,
                    std::uint32_t seed = 0) noexcept;

}  // namespace flowrt
