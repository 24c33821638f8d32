// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <vector>

#include "flowrt/common/clock.hpp"
#include "flowrt/sink/spill_store.hpp"
#include "flowrt/wire/checkpoint.hpp"
#include "flowrt/wire/frame.hpp"
#include "flowrt/workflow/projection.hpp"
#include "flowrt/workflow/transforms.hpp"

namespace flowrt {

struct WaitMatchKey {
  RequestId request_id;
  FunctionName function;
  DataName data;

  std::uint64_t hash() const;
  friend bool operator==(const WaitMatchKey&, const WaitMatchKey&) = default;
  friend auto operator<=>(const WaitMatchKey&, const WaitMatchKey&) = default;
};

enum class Location { kMemory, kSpilled };
enum class MatchStatus { kPartial, kDataComplete, kFunctionReady };

const char* to_string(MatchStatus s) noexcept;

struct SinkStats {
  std::uint64_t resident_bytes = 0;
  double byte_seconds = 0.0;
  std::uint64_t spilled_bytes = 0;
  std::uint64_t hits = 0;    // successful takes
  std::uint64_t misses = 0;  // takes before readiness
  std::uint64_t spills = 0;
  std::uint64_t spill_failures = 0;
  std::uint64_t spill_reloads = 0;
  std::uint64_t releases = 0;
  std::uint64_t released_bytes = 0;
  std::uint64_t chunks_accepted = 0;
  std::uint64_t duplicate_chunks = 0;
  std::uint64_t unknown_flow_chunks = 0;
  std::uint64_t duplicate_take_attempts = 0;
  // Inputs handed to a FLU more than once. Exactly-once dispatch keeps it 0.
  std::uint64_t duplicate_deliveries = 0;
};

// Snapshot of one staged entry, for inspection.
struct EntryInfo {
  WaitMatchKey key;
  std::uint64_t size = 0;
  bool complete = false;
  Location location = Location::kMemory;
  Nanos arrived_at{0};
  std::set<std::uint64_t> delivered_to;
};

struct SinkOptions {
  Nanos ttl = from_seconds(30);
  std::filesystem::path spill_root;
};

// Wait-Match Memory of one node. Flows are mapped to the (function, data)
// they feed; entries become complete once END arrives with every preceding
// sequence present, and a function becomes ready once all its declared
// inputs are complete. Thread-safe.
class DataSink {
 public:
  using ReadyListener = std::function<void(const RequestId&, const FunctionName&)>;

  DataSink(NodeId node, const Clock& clock, SinkOptions options);

  const NodeId& node() const { return node_; }
  const SinkOptions& options() const { return options_; }

  void register_function(const FunctionName& fn, std::vector<DataName> declared_inputs);
  // Several flows may feed one (function, data) pair, as the branches of a
  // switch do; the first flow to deliver owns the entry.
  void register_flow(FlowId flow, const FunctionName& dest, const DataName& data);
  // Registers every local function and inbound edge, plus gateway input for
  // the entry when it is hosted here.
  void configure(const WorkflowDefinition& def, const LocalDataFlowGraph& graph);

  // Invoked outside the sink lock, once per (request, function), on the
  // transition to ready.
  void set_ready_listener(ReadyListener listener);

  MatchStatus put(const FlowChunk& chunk);

  // Highest sequence received with every predecessor present.
  std::optional<std::uint64_t> acked_seq(const FlowKey& flow) const;
  bool flow_complete(const FlowKey& flow) const;

  // Throws Error(kNotReady) or Error(kAlreadyTaken).
  InputBundle take(const RequestId& request, const FunctionName& fn, std::uint64_t flu_id);
  bool is_ready(const RequestId& request, const FunctionName& fn) const;

  // Throws Error(kStillNeeded) if the consuming function has not taken it.
  std::uint64_t proactive_release(const RequestId& request, const FunctionName& fn,
                                  const DataName& data);
  // Drops every entry of a request regardless of consumption.
  std::uint64_t release_request(const RequestId& request);
  // Forgets dedup tombstones and readiness state of a finished request.
  void forget_request(const RequestId& request);

  std::vector<WaitMatchKey> expire_sweep(Nanos now);

  void store_checkpoint(const Checkpoint& cp);
  std::optional<Checkpoint> load_checkpoint(const FlowKey& flow) const;

  SinkStats stats() const;
  std::optional<EntryInfo> inspect(const WaitMatchKey& key) const;
  std::size_t entry_count() const;

 private:
  struct Entry {
    std::vector<Payload> parts;
    std::uint64_t size = 0;
    bool complete = false;
    Location location = Location::kMemory;
    Nanos arrived_at{0};
    FlowId owner;
    std::set<std::uint64_t> delivered_to;
  };
  struct FlowState {
    WaitMatchKey key;
    std::uint64_t next_seq = 0;  // first missing sequence
    std::map<std::uint64_t, Payload> out_of_order;
    std::optional<std::uint64_t> end_seq;
    bool complete = false;
    bool rejected = false;  // lost the race for a shared entry
  };
  struct FunctionState {
    std::set<DataName> missing;
    bool ready = false;
    std::optional<std::uint64_t> taken_by;
  };
  struct Route {
    FunctionName function;
    DataName data;
  };

  void account(Nanos now);
  void set_resident(std::int64_t delta);
  FunctionState& function_state(const RequestId& request, const FunctionName& fn);
  MatchStatus status_of(const WaitMatchKey& key) const;
  std::uint64_t drop_entry(std::map<WaitMatchKey, Entry>::iterator it);
  Payload materialize(const WaitMatchKey& key, Entry& e);

  NodeId node_;
  const Clock& clock_;
  SinkOptions options_;
  SpillStore spill_;
  ReadyListener listener_;

  mutable std::mutex mu_;
  std::map<FunctionName, std::vector<DataName>> declared_;
  std::map<std::uint64_t, Route> routes_;
  std::map<WaitMatchKey, Entry> entries_;
  std::map<FlowKey, FlowState> flows_;
  std::map<std::pair<RequestId, FunctionName>, FunctionState> functions_;
  std::map<FlowKey, Checkpoint> checkpoints_;

  SinkStats stats_;
  Int128 byte_nanos_ = 0;
  Nanos last_account_{0};
};

}  // namespace flowrt
