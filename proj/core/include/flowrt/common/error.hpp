// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace flowrt {

enum class Errc {
  kSyntax,
  kSemantic,
  kPlacement,
  kUnknownNode,
  kNetworkUnreachable,
  kSeqGap,
  kTransferInterrupted,
  kRetentionLost,
  kRequestTooLarge,
  kNotReady,
  kAlreadyTaken,
  kStillNeeded,
  kSpillIo,
  kNoIdleSlot,
  kComputeFault,
  kUnknownData,
  kAmbiguousSwitch,
  kUnrecoverable,
  kConfig,
  kMismatchedWorkloads,
  kInvalidArgument,
};

const char* to_string(Errc code) noexcept;

// Every failure raised by the library carries a code so callers and tests
// can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace flowrt
