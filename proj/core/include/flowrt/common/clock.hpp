// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "flowrt/common/types.hpp"

namespace flowrt {

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Nanos now() const = 0;
};

// Hand-driven clock for unit tests.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(Nanos start = kZeroTime) : now_(start) {}
  Nanos now() const override { return now_; }
  void set(Nanos t) { now_ = t; }
  void advance(Nanos d) { now_ += d; }

 private:
  Nanos now_;
};

}  // namespace flowrt
