// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <mutex>
#include <ostream>
#include <string>
#include <vector>

#include "flowrt/common/types.hpp"

namespace flowrt {

struct EngineEvent {
  Nanos at{0};
  NodeId node;
  std::string kind;  // READY, DISPATCH, BLOCK, SCALE, RECYCLE, REDO, COMPLETE, END, ...
  std::string request;  // hex, empty when not request-scoped
  FunctionName function;
  std::uint64_t container = 0;
  std::string detail;

  friend bool operator==(const EngineEvent&, const EngineEvent&) = default;
};

// Append-only, shared by every engine of a cluster.
class EventLog {
 public:
  explicit EventLog(bool enabled = true) : enabled_(enabled) {}

  void append(EngineEvent e);
  bool enabled() const { return enabled_; }
  void set_enabled(bool on) { enabled_ = on; }

  std::vector<EngineEvent> events() const;
  std::vector<EngineEvent> of_kind(const std::string& kind) const;
  std::size_t size() const;

  // One JSON object per line.
  void write_json_lines(std::ostream& out) const;

 private:
  mutable std::mutex mu_;
  bool enabled_;
  std::vector<EngineEvent> events_;
};

std::string to_json_line(const EngineEvent& e);

}  // namespace flowrt
