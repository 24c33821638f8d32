// SPDX-License-Identifier: Apache-2.0
#include "flowrt/harness/workload.hpp"

#include <vector>

#include "flowrt/common/error.hpp"
#include "flowrt/common/units.hpp"

namespace flowrt {

namespace {

std::vector<std::string> split_colon(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(':', start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void bad(const std::string& text, const std::string& why) {
  throw Error(Errc::kInvalidArgument, "bad load pattern '" + text + "': " + why);
}

double rate(const std::string& text, const std::string& s) {
  auto r = parse_rate(s);
  if (!r || *r <= 0) bad(text, "expected a positive rate, got '" + s + "'");
  return *r;
}

Nanos dur(const std::string& text, const std::string& s) {
  auto d = parse_duration(s);
  if (!d || d->count() <= 0) bad(text, "expected a positive duration, got '" + s + "'");
  return *d;
}

}  // namespace

LoadPattern LoadPattern::open(double rpm, Nanos duration) {
  LoadPattern p;
  p.kind = Kind::kOpenLoop;
  p.rpm = rpm;
  p.duration = duration;
  return p;
}

LoadPattern LoadPattern::closed(std::size_t clients, Nanos duration) {
  LoadPattern p;
  p.kind = Kind::kClosedLoop;
  p.clients = clients;
  p.duration = duration;
  return p;
}

LoadPattern LoadPattern::burst(double low_rpm, double high_rpm, Nanos switch_at) {
  LoadPattern p;
  p.kind = Kind::kBurst;
  p.low_rpm = low_rpm;
  p.high_rpm = high_rpm;
  p.switch_at = switch_at;
  p.duration = switch_at + switch_at;
  return p;
}

LoadPattern LoadPattern::parse(const std::string& text) {
  auto parts = split_colon(text);
  if (parts.empty()) bad(text, "empty");
  if (parts[0] == "open") {
    if (parts.size() != 3) bad(text, "expected open:<rpm>:<duration>");
    return open(rate(text, parts[1]), dur(text, parts[2]));
  }
  if (parts[0] == "closed") {
    if (parts.size() != 3) bad(text, "expected closed:<clients>:<duration>");
    auto n = rate(text, parts[1]);
    if (n != static_cast<double>(static_cast<std::size_t>(n))) bad(text, "clients must be an integer");
    return closed(static_cast<std::size_t>(n), dur(text, parts[2]));
  }
  if (parts[0] == "burst") {
    if (parts.size() != 4) bad(text, "expected burst:<low rpm>:<high rpm>:<switch time>");
    return burst(rate(text, parts[1]), rate(text, parts[2]), dur(text, parts[3]));
  }
  bad(text, "unknown kind '" + parts[0] + "'");
}

std::string LoadPattern::to_string() const {
  auto secs = [](Nanos d) { return format_double(flowrt::to_seconds(d)) + "s"; };
  switch (kind) {
    case Kind::kOpenLoop: return "open:" + format_double(rpm) + "rpm:" + secs(duration);
    case Kind::kClosedLoop: return "closed:" + std::to_string(clients) + ":" + secs(duration);
    case Kind::kBurst:
      return "burst:" + format_double(low_rpm) + ":" + format_double(high_rpm) + ":" +
             secs(switch_at);
  }
  return "?";
}

Nanos LoadPattern::total_duration() const {
  return kind == Kind::kBurst ? switch_at + switch_at : duration;
}

RequestId request_id_for(std::uint64_t seed, std::uint64_t index) {
  return RequestId::from_words(seed, index);
}

}  // namespace flowrt
