// SPDX-License-Identifier: Apache-2.0
#include "flowrt/harness/compare.hpp"

#include <algorithm>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "flowrt/common/error.hpp"
#include "flowrt/common/units.hpp"

namespace flowrt {

namespace {

// 0/0 is treated as parity.
double ratio(double a, double b) {
  if (a == 0 && b == 0) return 1.0;
  if (b == 0) return a > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  return a / b;
}

std::string cell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

}  // namespace

ComparisonReport compare(const RunMetrics& a, const RunMetrics& b) {
  auto mismatch = [](const std::string& what, const std::string& x, const std::string& y) {
    throw Error(Errc::kMismatchedWorkloads, what + " differs: '" + x + "' vs '" + y + "'");
  };
  if (a.workflow != b.workflow) mismatch("workflow", a.workflow, b.workflow);
  if (a.pattern != b.pattern) mismatch("pattern", a.pattern, b.pattern);
  if (a.input_size != b.input_size)
    mismatch("input size", std::to_string(a.input_size), std::to_string(b.input_size));
  if (a.seed != b.seed) mismatch("seed", std::to_string(a.seed), std::to_string(b.seed));

  ComparisonReport r;
  r.workflow = a.workflow;
  r.pattern = a.pattern;
  r.label_a = a.mode;
  r.label_b = b.mode;
  r.p50_ratio = ratio(a.p50_ms, b.p50_ms);
  r.p99_ratio = ratio(a.p99_ms, b.p99_ms);
  r.throughput_ratio = ratio(a.throughput_rpm, b.throughput_rpm);
  r.gb_seconds_ratio = ratio(a.container_gb_seconds, b.container_gb_seconds);
  r.sink_byte_seconds_ratio = ratio(a.sink_byte_seconds, b.sink_byte_seconds);
  return r;
}

void add_default_thresholds(ComparisonReport& r, const RunMetrics& a, const RunMetrics& b) {
  r.thresholds.push_back({"throughput_ratio", r.throughput_ratio, 1.0, true});
  r.thresholds.push_back({"mean_latency_ratio", ratio(a.mean_ms, b.mean_ms), 1.0, false});
  r.thresholds.push_back({"timeouts_a", static_cast<double>(a.timeouts + a.failed), 0.0, false});
}

bool ComparisonReport::passed() const {
  return std::all_of(thresholds.begin(), thresholds.end(),
                     [](const Threshold& t) { return t.passed(); });
}

void ComparisonReport::write_table(std::ostream& out, const RunMetrics& a,
                                   const RunMetrics& b) const {
  out << "workflow " << workflow << ", pattern " << pattern << "\n\n";
  char line[160];
  std::snprintf(line, sizeof(line), "%-20s %14s %14s %10s\n", "metric", label_a.c_str(),
                label_b.c_str(), "ratio");
  out << line;
  auto row = [&](const char* name, double x, double y, double q) {
    std::snprintf(line, sizeof(line), "%-20s %14s %14s %10s\n", name, cell(x).c_str(),
                  cell(y).c_str(), cell(q).c_str());
    out << line;
  };
  row("p50_ms", a.p50_ms, b.p50_ms, p50_ratio);
  row("p99_ms", a.p99_ms, b.p99_ms, p99_ratio);
  row("throughput_rpm", a.throughput_rpm, b.throughput_rpm, throughput_ratio);
  row("gb_seconds", a.container_gb_seconds, b.container_gb_seconds, gb_seconds_ratio);
  row("sink_byte_seconds", a.sink_byte_seconds, b.sink_byte_seconds, sink_byte_seconds_ratio);
  if (!thresholds.empty()) out << '\n';
  for (const auto& t : thresholds)
    out << (t.passed() ? "PASS " : "FAIL ") << t.name << " = " << cell(t.value)
        << (t.at_least ? " >= " : " <= ") << cell(t.limit) << '\n';
}

void ComparisonReport::write_json(std::ostream& out) const {
  nlohmann::ordered_json j;
  j["workflow"] = workflow;
  j["pattern"] = pattern;
  j["a"] = label_a;
  j["b"] = label_b;
  j["ratios"] = {{"p50", p50_ratio},
                 {"p99", p99_ratio},
                 {"throughput", throughput_ratio},
                 {"gb_seconds", gb_seconds_ratio},
                 {"sink_byte_seconds", sink_byte_seconds_ratio}};
  auto verdicts = nlohmann::ordered_json::array();
  for (const auto& t : thresholds)
    verdicts.push_back({{"name", t.name},
                        {"value", t.value},
                        {"limit", t.limit},
                        {"op", t.at_least ? ">=" : "<="},
                        {"passed", t.passed()}});
  j["verdicts"] = verdicts;
  j["passed"] = passed();
  out << j.dump(2) << '\n';
}

}  // namespace flowrt
