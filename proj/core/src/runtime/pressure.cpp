// SPDX-License-Identifier: Apache-2.0
#include "flowrt/runtime/pressure.hpp"

#include "flowrt/common/error.hpp"

namespace flowrt {

PressureEstimate estimate_pressure(std::uint64_t size, double bandwidth_bps, double t_flu,
                                   double alpha) {
  if (!(bandwidth_bps > 0)) throw Error(Errc::kInvalidArgument, "bandwidth must be positive");
  if (!(alpha > 0)) throw Error(Errc::kInvalidArgument, "alpha must be positive");
  if (t_flu < 0) throw Error(Errc::kInvalidArgument, "t_flu must be non-negative");
  PressureEstimate e{size, bandwidth_bps, t_flu, alpha, 0.0};
  // Extended precision keeps the subtraction accurate when both terms are close.
  long double transfer = static_cast<long double>(alpha) * 8.0L *
                         static_cast<long double>(size) / static_cast<long double>(bandwidth_bps);
  e.pressure = static_cast<double>(transfer - static_cast<long double>(t_flu));
  return e;
}

FluStats update_flu_stats(FluStats s, double sample) {
  if (sample < 0) throw Error(Errc::kInvalidArgument, "negative execution time");
  s.ewma = s.count == 0 ? sample : s.weight * sample + (1.0 - s.weight) * s.ewma;
  ++s.count;
  return s;
}

}  // namespace flowrt
