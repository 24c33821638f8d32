// SPDX-License-Identifier: Apache-2.0
#include "flowrt/engine/event_log.hpp"

#include <nlohmann/json.hpp>

namespace flowrt {

void EventLog::append(EngineEvent e) {
  if (!enabled_) return;
  std::lock_guard lock(mu_);
  events_.push_back(std::move(e));
}

std::vector<EngineEvent> EventLog::events() const {
  std::lock_guard lock(mu_);
  return events_;
}

std::vector<EngineEvent> EventLog::of_kind(const std::string& kind) const {
  std::lock_guard lock(mu_);
  std::vector<EngineEvent> out;
  for (const auto& e : events_)
    if (e.kind == kind) out.push_back(e);
  return out;
}

std::size_t EventLog::size() const {
  std::lock_guard lock(mu_);
  return events_.size();
}

std::string to_json_line(const EngineEvent& e) {
  nlohmann::ordered_json j;
  j["t_ns"] = e.at.count();
  j["node"] = e.node;
  j["event"] = e.kind;
  if (!e.request.empty()) j["request"] = e.request;
  if (!e.function.empty()) j["function"] = e.function;
  if (e.container) j["container"] = e.container;
  if (!e.detail.empty()) j["detail"] = e.detail;
  return j.dump();
}

void EventLog::write_json_lines(std::ostream& out) const {
  std::lock_guard lock(mu_);
  for (const auto& e : events_) out << to_json_line(e) << '\n';
}

}  // namespace flowrt
