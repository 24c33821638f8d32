// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>

#include "flowrt/common/types.hpp"

namespace flowrt {

struct Checkpoint {
  RequestId request_id;
  FlowId flow_id;
  std::optional<std::uint64_t> acked_seq;  // nullopt: nothing acked yet
  Nanos at{0};

  FlowKey key() const { return {request_id, flow_id}; }
  // First sequence a replay has to send.
  std::uint64_t resume_seq() const { return acked_seq ? *acked_seq + 1 : 0; }

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

}  // namespace flowrt
