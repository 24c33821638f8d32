// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "flowrt/common/types.hpp"

namespace flowrt {

// "4MiB", "16KiB", "500000", "5MB" (decimal), "2GiB".
std::optional<std::uint64_t> parse_size(std::string_view text);
// "120s", "2m", "500ms", "1.5s", bare numbers are seconds.
std::optional<Nanos> parse_duration(std::string_view text);
// "10rpm" or "10".
std::optional<double> parse_rate(std::string_view text);

std::string format_size(std::uint64_t bytes);
std::string format_double(double v);

std::string_view trim(std::string_view s);

}  // namespace flowrt
