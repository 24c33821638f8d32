// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>

#include "flowrt/common/bytes.hpp"
#include "flowrt/common/types.hpp"

namespace flowrt {

// Function-exclusive on-disk storage for expired sink entries:
//   <root>/<function>/<hash>.bin   raw bytes
//   <root>/<function>/<hash>.meta  u64 length | u32 crc32, big-endian
// All failures raise Error(kSpillIo).
class SpillStore {
 public:
  explicit SpillStore(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path data_path(const FunctionName& fn, std::uint64_t hash) const;
  std::filesystem::path meta_path(const FunctionName& fn, std::uint64_t hash) const;

  void write(const FunctionName& fn, std::uint64_t hash, std::span<const std::uint8_t> bytes);
  // Verifies length and checksum against the sidecar.
  Bytes read(const FunctionName& fn, std::uint64_t hash) const;
  void remove(const FunctionName& fn, std::uint64_t hash) noexcept;

 private:
  std::filesystem::path root_;
};

std::string hash_hex(std::uint64_t hash);

}  // namespace flowrt
