// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <mutex>
#include <vector>

#include "flowrt/common/types.hpp"

namespace flowrt {

// Bandwidth limiter of one container. Level is kept in integer units of
// bit-nanoseconds per second so that refill and wait arithmetic is exact for
// integral rates: a 40 Mbps bucket releases 40e6 bits after exactly 1 s.
//
// Acquires may be queued ahead of time: an acquire that has to wait moves
// the refill cursor into the future, and later acquires line up behind it.
class TokenBucket {
 public:
  struct Release {
    Nanos at;
    std::uint64_t bits;
  };

  // `rate_bps` is rounded to whole bits per second.
  TokenBucket(double rate_bps, std::uint64_t burst_bits, bool start_full = false);

  TokenBucket(const TokenBucket&) = delete;
  TokenBucket& operator=(const TokenBucket&) = delete;

  // Debits `bits` and returns how long after `now` they may be released.
  // Throws Error(kRequestTooLarge) when bits > burst.
  Nanos acquire(std::uint64_t bits, Nanos now);

  // Tokens available at `now`, without debiting.
  double level_bits(Nanos now) const;
  std::uint64_t rate_bps() const { return rate_; }
  std::uint64_t burst_bits() const { return burst_; }

  void enable_trace(bool on);
  std::vector<Release> trace() const;

 private:
  void refill(Nanos now);

  mutable std::mutex mu_;
  std::uint64_t rate_;
  std::uint64_t burst_;
  Int128 level_;  // bits * 1e9
  Nanos last_refill_;
  bool tracing_ = false;
  std::vector<Release> trace_;
};

}  // namespace flowrt
