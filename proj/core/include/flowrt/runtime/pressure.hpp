// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

namespace flowrt {

// Expected transfer backlog of one emission:
//   pressure = alpha * (8 * size / bandwidth) - t_flu   [seconds]
// Positive pressure means the transfer outlasts the next execution.
struct PressureEstimate {
  std::uint64_t size = 0;       // bytes
  double bandwidth_bps = 0.0;   // bits per second
  double t_flu = 0.0;           // seconds
  double alpha = 1.0;
  double pressure = 0.0;        // seconds

  bool blocks() const { return pressure > 0.0; }
};

PressureEstimate estimate_pressure(std::uint64_t size, double bandwidth_bps, double t_flu,
                                   double alpha);

// Recursive exponential average of one function's execution time.
struct FluStats {
  std::string function;
  double ewma = 0.0;  // seconds; 0 until the first sample
  std::uint64_t count = 0;
  double weight = 0.3;

  double t_flu() const { return count == 0 ? 0.0 : ewma; }
};

// First sample initializes; later ones blend with `weight`.
FluStats update_flu_stats(FluStats s, double sample);

}  // namespace flowrt
