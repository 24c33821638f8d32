// SPDX-License-Identifier: Apache-2.0
#include "flowrt/wire/token_bucket.hpp"

#include <cmath>

#include "flowrt/common/error.hpp"

namespace flowrt {

namespace {
constexpr Int128 kScale = 1'000'000'000;
}

TokenBucket::TokenBucket(double rate_bps, std::uint64_t burst_bits, bool start_full)
    : rate_(static_cast<std::uint64_t>(std::llround(rate_bps))),
      burst_(burst_bits),
      level_(start_full ? static_cast<Int128>(burst_bits) * kScale : 0),
      last_refill_(0) {
  if (rate_ == 0) throw Error(Errc::kConfig, "token bucket rate must be positive");
  if (burst_ == 0) throw Error(Errc::kConfig, "token bucket burst must be positive");
}

void TokenBucket::refill(Nanos now) {
  if (now <= last_refill_) return;
  Int128 cap = static_cast<Int128>(burst_) * kScale;
  Int128 gained = static_cast<Int128>(rate_) * (now - last_refill_).count();
  level_ = std::min(cap, level_ + gained);
  last_refill_ = now;
}

Nanos TokenBucket::acquire(std::uint64_t bits, Nanos now) {
  if (bits > burst_)
    throw Error(Errc::kRequestTooLarge, std::to_string(bits) + " bits exceed burst of " +
                                            std::to_string(burst_));
  std::lock_guard lock(mu_);
  refill(now);
  Nanos start = std::max(now, last_refill_);
  Int128 need = static_cast<Int128>(bits) * kScale;
  Nanos release = start;
  if (level_ >= need) {
    level_ -= need;
  } else {
    Int128 deficit = need - level_;
    Int128 wait = (deficit + rate_ - 1) / rate_;
    release = start + Nanos{static_cast<std::int64_t>(wait)};
    level_ = level_ + static_cast<Int128>(rate_) * wait - need;
    last_refill_ = release;
  }
  if (tracing_) trace_.push_back({release, bits});
  return release - now;
}

double TokenBucket::level_bits(Nanos now) const {
  std::lock_guard lock(mu_);
  Int128 level = level_;
  if (now > last_refill_) {
    Int128 cap = static_cast<Int128>(burst_) * kScale;
    level = std::min(cap, level + static_cast<Int128>(rate_) * (now - last_refill_).count());
  }
  return static_cast<double>(level) / 1e9;
}

void TokenBucket::enable_trace(bool on) {
  std::lock_guard lock(mu_);
  tracing_ = on;
}

std::vector<TokenBucket::Release> TokenBucket::trace() const {
  std::lock_guard lock(mu_);
  return trace_;
}

}  // namespace flowrt
