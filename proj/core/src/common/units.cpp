// SPDX-License-Identifier: Apache-2.0
#include "flowrt/common/units.hpp"

#include <charconv>
#include <cmath>

namespace flowrt {

std::string_view trim(std::string_view s) {
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

namespace {

// Splits "12.5MiB" into 12.5 and "MiB".
std::optional<std::pair<double, std::string_view>> split_number(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr == text.data()) return std::nullopt;
  if (!std::isfinite(v) || v < 0) return std::nullopt;
  return std::pair{v, trim(text.substr(static_cast<std::size_t>(ptr - text.data())))};
}

}  // namespace

std::optional<std::uint64_t> parse_size(std::string_view text) {
  auto parts = split_number(text);
  if (!parts) return std::nullopt;
  auto [v, unit] = *parts;
  double mult = 0;
  if (unit.empty() || unit == "B") mult = 1;
  else if (unit == "KiB" || unit == "K") mult = 1024.0;
  else if (unit == "MiB" || unit == "M") mult = 1024.0 * 1024.0;
  else if (unit == "GiB" || unit == "G") mult = 1024.0 * 1024.0 * 1024.0;
  else if (unit == "KB" || unit == "kB") mult = 1e3;
  else if (unit == "MB") mult = 1e6;
  else if (unit == "GB") mult = 1e9;
  else return std::nullopt;
  double bytes = v * mult;
  if (bytes != std::floor(bytes)) return std::nullopt;
  return static_cast<std::uint64_t>(bytes);
}

std::optional<Nanos> parse_duration(std::string_view text) {
  auto parts = split_number(text);
  if (!parts) return std::nullopt;
  auto [v, unit] = *parts;
  if (unit.empty() || unit == "s") return from_seconds(v);
  if (unit == "ms") return from_millis(v);
  if (unit == "m" || unit == "min") return from_seconds(v * 60.0);
  if (unit == "h") return from_seconds(v * 3600.0);
  return std::nullopt;
}

std::optional<double> parse_rate(std::string_view text) {
  auto parts = split_number(text);
  if (!parts) return std::nullopt;
  auto [v, unit] = *parts;
  if (unit.empty() || unit == "rpm") return v;
  return std::nullopt;
}

std::string format_size(std::uint64_t bytes) {
  constexpr std::uint64_t kMiB = 1024 * 1024;
  if (bytes != 0 && bytes % kMiB == 0) return std::to_string(bytes / kMiB) + "MiB";
  if (bytes != 0 && bytes % 1024 == 0) return std::to_string(bytes / 1024) + "KiB";
  return std::to_string(bytes);
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace flowrt
