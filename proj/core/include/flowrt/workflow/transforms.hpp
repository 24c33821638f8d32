// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <vector>

#include "flowrt/common/bytes.hpp"
#include "flowrt/workflow/workflow.hpp"

namespace flowrt {

using InputBundle = std::map<DataName, Payload>;

// Output of one function body before routing.
Payload apply_transform(const FunctionSpec& fn, const InputBundle& inputs);

// Bytes delivered to destination `index` of an edge with `fanout`
// destinations. Only kSplit partitions; every other transform replicates.
Payload route_payload(const FunctionSpec& fn, const Payload& output,
                      std::size_t index, std::size_t fanout);

// Label chosen for a conditional edge.
std::string select_label(const SwitchSelector& selector,
                         const std::vector<std::string>& labels,
                         const Payload& output);

// Total bytes of the inputs as seen by the compute model.
std::uint64_t bundle_size(const InputBundle& inputs);

// Deterministic lowercase-words text used as request input: words from a
// 16-word vocabulary separated by spaces, with a newline one time in 16.
Bytes generate_input(std::uint64_t seed, std::uint64_t request_index,
                     std::uint64_t size);

std::uint64_t load_u64_be(const std::uint8_t* p);
void store_u64_be(std::uint8_t* p, std::uint64_t v);

}  // namespace flowrt
