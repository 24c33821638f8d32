// SPDX-License-Identifier: Apache-2.0
#include "flowrt/harness/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "flowrt/common/error.hpp"
#include "flowrt/common/units.hpp"

namespace flowrt {

double nearest_rank(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0.0;
  if (!(p > 0 && p <= 100)) throw Error(Errc::kInvalidArgument, "percentile out of range");
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(sorted.size())));
  return sorted[std::max<std::size_t>(rank, 1) - 1];
}

double gb_seconds(const std::vector<ContainerLifetime>& lifetimes, Nanos end) {
  double total = 0;
  for (const auto& l : lifetimes) {
    Nanos stop = l.recycled_at ? std::min(*l.recycled_at, end) : end;
    if (stop <= l.created_at) continue;
    total += static_cast<double>(l.memory_mb) / 1024.0 * to_seconds(stop - l.created_at);
  }
  return total;
}

void RunMetrics::summarize() {
  std::vector<double> lat;
  submitted = requests.size();
  completed = failed = timeouts = 0;
  for (const auto& r : requests) {
    if (r.failed) ++failed;
    else if (r.completed()) {
      ++completed;
      lat.push_back(r.latency_ms());
    } else {
      ++timeouts;
    }
  }
  std::sort(lat.begin(), lat.end());
  mean_ms = lat.empty() ? 0.0 : std::accumulate(lat.begin(), lat.end(), 0.0) / lat.size();
  p50_ms = nearest_rank(lat, 50);
  p95_ms = nearest_rank(lat, 95);
  p99_ms = nearest_rank(lat, 99);
  throughput_rpm = duration_s > 0 ? static_cast<double>(completed) / duration_s * 60.0 : 0.0;
}

void RunMetrics::write_csv(std::ostream& out) const {
  out << "request_id,submit,start,end,latency_ms\n";
  for (const auto& r : requests) {
    out << r.id.hex() << ',' << format_double(to_seconds(r.submit)) << ','
        << (r.start ? format_double(to_seconds(*r.start)) : "") << ','
        << (r.end ? format_double(to_seconds(*r.end)) : "") << ','
        << (r.completed() ? format_double(r.latency_ms()) : "") << '\n';
  }
}

void RunMetrics::write_summary_json(std::ostream& out) const {
  nlohmann::ordered_json j;
  j["mode"] = mode;
  j["workflow"] = workflow;
  j["pattern"] = pattern;
  j["seed"] = seed;
  j["input_size"] = input_size;
  j["duration_s"] = duration_s;
  j["finished_at_s"] = finished_at_s;
  j["submitted"] = submitted;
  j["completed"] = completed;
  j["timeouts"] = timeouts;
  j["failed"] = failed;
  j["latency_ms"] = {{"mean", mean_ms}, {"p50", p50_ms}, {"p95", p95_ms}, {"p99", p99_ms}};
  j["throughput_rpm"] = throughput_rpm;
  j["container_gb_seconds"] = container_gb_seconds;
  j["sink_byte_seconds"] = sink_byte_seconds;
  j["cold_starts"] = cold_starts;
  j["scale_decisions"] = scale_decisions;
  j["pressure_scale_decisions"] = pressure_scale_decisions;
  j["spills"] = spills;
  j["redos"] = redos;
  j["duplicate_deliveries"] = duplicate_deliveries;
  j["connectors"] = {{"small", small_transfers},
                     {"local", local_connectors},
                     {"remote", remote_connectors}};
  j["peak_containers"] = peak_containers;
  out << j.dump(2) << '\n';
}

}  // namespace flowrt
