// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace flowrt {

using Bytes = std::vector<std::uint8_t>;

// Immutable, shareable view over a byte buffer. Slicing and copying a
// Payload never copies the underlying bytes.
class Payload {
 public:
  Payload() = default;
  explicit Payload(Bytes bytes)
      : buf_(std::make_shared<const Bytes>(std::move(bytes))),
        off_(0),
        len_(buf_->size()) {}

  static Payload copy_of(std::span<const std::uint8_t> bytes) {
    return Payload(Bytes(bytes.begin(), bytes.end()));
  }
  static Payload from_string(std::string_view s) {
    return Payload(Bytes(s.begin(), s.end()));
  }

  std::size_t size() const noexcept { return len_; }
  bool empty() const noexcept { return len_ == 0; }

  std::span<const std::uint8_t> view() const noexcept {
    if (!buf_) return {};
    return {buf_->data() + off_, len_};
  }

  Payload slice(std::size_t offset, std::size_t length) const {
    Payload p;
    p.buf_ = buf_;
    p.off_ = off_ + offset;
    p.len_ = length;
    return p;
  }

  Bytes to_bytes() const {
    auto v = view();
    return Bytes(v.begin(), v.end());
  }

  friend bool operator==(const Payload& a, const Payload& b) {
    auto x = a.view();
    auto y = b.view();
    return x.size() == y.size() &&
           std::equal(x.begin(), x.end(), y.begin());
  }

 private:
  std::shared_ptr<const Bytes> buf_;
  std::size_t off_ = 0;
  std::size_t len_ = 0;
};

// Concatenates payloads into one owned buffer.
inline Payload concat(std::span<const Payload> parts) {
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  Bytes out;
  out.reserve(total);
  for (const auto& p : parts) {
    auto v = p.view();
    out.insert(out.end(), v.begin(), v.end());
  }
  return Payload(std::move(out));
}

}  // namespace flowrt
