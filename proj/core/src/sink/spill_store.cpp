// SPDX-License-Identifier: Apache-2.0
#include "flowrt/sink/spill_store.hpp"

#include <array>
#include <cstdio>
#include <fstream>

#include "flowrt/common/crc32.hpp"
#include "flowrt/common/error.hpp"

namespace flowrt {

namespace fs = std::filesystem;

std::string hash_hex(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

fs::path SpillStore::data_path(const FunctionName& fn, std::uint64_t hash) const {
  return root_ / fn / (hash_hex(hash) + ".bin");
}

fs::path SpillStore::meta_path(const FunctionName& fn, std::uint64_t hash) const {
  return root_ / fn / (hash_hex(hash) + ".meta");
}

void SpillStore::write(const FunctionName& fn, std::uint64_t hash,
                       std::span<const std::uint8_t> bytes) {
  std::error_code ec;
  fs::create_directories(root_ / fn, ec);
  if (ec) throw Error(Errc::kSpillIo, "cannot create " + (root_ / fn).string() + ": " + ec.message());

  auto data = data_path(fn, hash);
  std::ofstream out(data, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw Error(Errc::kSpillIo, "cannot write " + data.string());

  std::array<std::uint8_t, 12> meta{};
  std::uint64_t len = bytes.size();
  std::uint32_t crc = crc32(bytes);
  for (int i = 0; i < 8; ++i) meta[i] = static_cast<std::uint8_t>(len >> (56 - 8 * i));
  for (int i = 0; i < 4; ++i) meta[8 + i] = static_cast<std::uint8_t>(crc >> (24 - 8 * i));
  std::ofstream m(meta_path(fn, hash), std::ios::binary | std::ios::trunc);
  m.write(reinterpret_cast<const char*>(meta.data()), meta.size());
  m.close();
  if (!m) throw Error(Errc::kSpillIo, "cannot write " + meta_path(fn, hash).string());
}

Bytes SpillStore::read(const FunctionName& fn, std::uint64_t hash) const {
  std::ifstream m(meta_path(fn, hash), std::ios::binary);
  std::array<std::uint8_t, 12> meta{};
  if (!m.read(reinterpret_cast<char*>(meta.data()), meta.size()))
    throw Error(Errc::kSpillIo, "missing sidecar " + meta_path(fn, hash).string());
  std::uint64_t len = 0;
  std::uint32_t crc = 0;
  for (int i = 0; i < 8; ++i) len = (len << 8) | meta[i];
  for (int i = 0; i < 4; ++i) crc = (crc << 8) | meta[8 + i];

  std::ifstream in(data_path(fn, hash), std::ios::binary);
  if (!in) throw Error(Errc::kSpillIo, "missing " + data_path(fn, hash).string());
  Bytes out(len);
  in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(len));
  if (static_cast<std::uint64_t>(in.gcount()) != len || in.peek() != EOF)
    throw Error(Errc::kSpillIo, "length mismatch in " + data_path(fn, hash).string());
  if (crc32(out) != crc)
    throw Error(Errc::kSpillIo, "checksum mismatch in " + data_path(fn, hash).string());
  return out;
}

void SpillStore::remove(const FunctionName& fn, std::uint64_t hash) noexcept {
  std::error_code ec;
  fs::remove(data_path(fn, hash), ec);
  fs::remove(meta_path(fn, hash), ec);
}

}  // namespace flowrt
