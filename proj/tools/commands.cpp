// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "flowrt/common/error.hpp"
#include "flowrt/common/units.hpp"
#include "flowrt/harness/baseline.hpp"
#include "flowrt/harness/catalog.hpp"
#include "flowrt/harness/cluster.hpp"
#include "flowrt/harness/compare.hpp"
#include "flowrt/harness/config_file.hpp"
#include "flowrt/workflow/parser.hpp"
#include "flowrt/workflow/validate.hpp"

namespace fs = std::filesystem;

namespace flowrt::cli {

namespace {

// Raised for argument values that parse but make no sense.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Experiment {
  ClusterConfig cluster;
  WorkloadSpec workload;
  Placement placement;
};

std::uint64_t size_arg(const std::string& flag, const std::string& v) {
  auto s = parse_size(v);
  if (!s) throw UsageError("bad size for " + flag + ": '" + v + "'");
  return *s;
}

Nanos duration_arg(const std::string& flag, const std::string& v) {
  auto d = parse_duration(v);
  if (!d) throw UsageError("bad duration for " + flag + ": '" + v + "'");
  return *d;
}

Experiment prepare(const Options& o) {
  Experiment e;
  bool builtin = builtin_workloads().count(o.workflow) > 0;
  if (!builtin && !fs::exists(o.workflow))
    throw UsageError("workflow '" + o.workflow + "' is neither builtin nor an existing file");
  e.cluster = o.cluster.empty() ? ClusterConfig::three_node() : load_cluster_config(o.cluster);
  e.cluster.runtime.alpha = o.alpha;
  e.cluster.runtime.sink_ttl = duration_arg("--ttl", o.ttl);
  e.cluster.validate();

  WorkloadParams params;
  params.fan = o.fan;
  params.input_size = size_arg("--input", o.input);
  params.memory_mb = o.memory_mb;
  e.workload.workflow = resolve_workflow(o.workflow, params);
  e.workload.input_size = params.input_size;
  e.workload.seed = o.seed;
  try {
    e.workload.pattern = LoadPattern::parse(o.pattern);
  } catch (const Error& err) {
    throw UsageError(err.what());
  }

  if (o.placement == "roundrobin") {
    e.placement = plan_placement(e.workload.workflow, e.cluster, PlacementKind::kRoundRobin);
  } else if (o.placement == "single") {
    e.placement = plan_placement(e.workload.workflow, e.cluster, PlacementKind::kSingleNode);
  } else if (o.placement.rfind("file:", 0) == 0) {
    e.placement = plan_placement(e.workload.workflow, e.cluster, PlacementKind::kExplicit,
                                 load_placement_file(o.placement.substr(5)));
  } else {
    throw UsageError("unknown placement '" + o.placement + "'");
  }
  return e;
}

void write_run(const fs::path& dir, const RunResult& r, bool events) {
  fs::create_directories(dir);
  const std::string& mode = r.metrics.mode;
  std::ofstream(dir / (mode + "_requests.csv")) << [&] {
    std::ostringstream s;
    r.metrics.write_csv(s);
    return s.str();
  }();
  std::ofstream summary(dir / (mode + "_summary.json"));
  r.metrics.write_summary_json(summary);
  if (events) {
    std::ofstream log(dir / (mode + "_events.jsonl"));
    for (const auto& e : r.events) log << to_json_line(e) << '\n';
  }
}

RunResult execute(const Experiment& e, const std::string& mode, const Options& o) {
  RunOptions ro;
  ro.event_log = !o.no_events;
  ro.verify_outputs = o.verify;
  return mode == "dataflow" ? run_dataflow(e.cluster, e.workload, e.placement, ro)
                            : run_controlflow(e.cluster, e.workload, e.placement, ro);
}

bool healthy(const RunResult& r) {
  return r.metrics.failed == 0 && r.output_mismatches == 0;
}

void print_brief(const RunResult& r) {
  const auto& m = r.metrics;
  std::cout << m.mode << ": " << m.completed << "/" << m.submitted << " completed, "
            << m.timeouts << " timeouts, " << m.failed << " failed, p50 "
            << format_double(m.p50_ms) << " ms, p99 " << format_double(m.p99_ms) << " ms, "
            << format_double(m.throughput_rpm) << " rpm, " << format_double(m.container_gb_seconds)
            << " GB*s\n";
  if (r.output_mismatches)
    std::cout << m.mode << ": " << r.output_mismatches << " outputs differ from the reference\n";
}

template <typename F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\nRun with --help for the accepted flags.\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace

int cmd_validate(const std::string& path) {
  return guarded([&] {
    if (!fs::exists(path)) throw UsageError("no such file '" + path + "'");
    WorkflowDefinition def;
    try {
      def = load_workflow_file(path);
    } catch (const Error& e) {
      std::cout << e.what() << "\n1 finding\n";
      return kFailure;
    }
    auto report = validate(def);
    for (const auto& f : report.findings)
      std::cout << to_string(f.kind) << " at '" << f.element << "': " << f.message << '\n';
    auto n = report.findings.size();
    std::cout << n << (n == 1 ? " finding" : " findings") << '\n';
    return n == 0 ? kOk : kFailure;
  });
}

int cmd_run(const Options& o) {
  return guarded([&] {
    Experiment e = prepare(o);
    bool ok = true;
    for (const char* mode : {"dataflow", "controlflow"}) {
      if (o.mode != "both" && o.mode != mode) continue;
      RunResult r = execute(e, mode, o);
      write_run(o.out, r, !o.no_events);
      print_brief(r);
      ok = ok && healthy(r);
    }
    return ok ? kOk : kFailure;
  });
}

int cmd_compare(const Options& o) {
  return guarded([&] {
    Experiment e = prepare(o);
    RunResult a = execute(e, "dataflow", o);
    RunResult b = execute(e, "controlflow", o);
    write_run(o.out, a, !o.no_events);
    write_run(o.out, b, !o.no_events);
    ComparisonReport report = compare(a.metrics, b.metrics);
    add_default_thresholds(report, a.metrics, b.metrics);
    report.write_table(std::cout, a.metrics, b.metrics);
    std::ofstream text(fs::path(o.out) / "report.txt");
    report.write_table(text, a.metrics, b.metrics);
    std::ofstream json(fs::path(o.out) / "report.json");
    report.write_json(json);
    return report.passed() && healthy(a) && healthy(b) ? kOk : kFailure;
  });
}

int cmd_sweep(const Options& o) {
  return guarded([&] {
    fs::create_directories(o.out);
    std::ofstream csv(fs::path(o.out) / "sweep.csv");
    csv << "param,value,mode,submitted,completed,timeouts,failed,throughput_rpm,mean_ms,p50_ms,"
           "p99_ms,gb_seconds,sink_byte_seconds,throughput_ratio\n";
    bool ok = true;
    for (const auto& value : o.values) {
      Options cell = o;
      if (o.param == "fan") {
        cell.fan = std::stoul(value);
      } else if (o.param == "input") {
        cell.input = value;
      } else if (o.param == "memory") {
        cell.memory_mb = std::stoll(value);
      } else {
        auto p = LoadPattern::parse(o.pattern);
        Nanos d = p.kind == LoadPattern::Kind::kClosedLoop ? p.duration : from_seconds(60);
        cell.pattern = "closed:" + value + ":" + format_double(to_seconds(d)) + "s";
      }
      Experiment e = prepare(cell);
      RunResult a = execute(e, "dataflow", cell);
      RunResult b = execute(e, "controlflow", cell);
      ComparisonReport report = compare(a.metrics, b.metrics);
      for (const RunResult* r : {&a, &b}) {
        const auto& m = r->metrics;
        csv << o.param << ',' << value << ',' << m.mode << ',' << m.submitted << ','
            << m.completed << ',' << m.timeouts << ',' << m.failed << ','
            << format_double(m.throughput_rpm) << ',' << format_double(m.mean_ms) << ','
            << format_double(m.p50_ms) << ',' << format_double(m.p99_ms) << ','
            << format_double(m.container_gb_seconds) << ',' << format_double(m.sink_byte_seconds)
            << ',' << format_double(report.throughput_ratio) << '\n';
      }
      std::cout << o.param << '=' << value << ": throughput ratio "
                << format_double(report.throughput_ratio) << '\n';
      ok = ok && healthy(a) && healthy(b);
    }
    return ok ? kOk : kFailure;
  });
}

int cmd_report(const std::string& dir) {
  return guarded([&] {
    fs::path a = fs::path(dir) / "dataflow_summary.json";
    fs::path b = fs::path(dir) / "controlflow_summary.json";
    if (!fs::exists(a) || !fs::exists(b))
      throw Error(Errc::kConfig, "'" + dir + "' lacks dataflow_summary.json or controlflow_summary.json");
    RunMetrics ma = read_summary_json(a.string());
    RunMetrics mb = read_summary_json(b.string());
    ComparisonReport report = compare(ma, mb);
    add_default_thresholds(report, ma, mb);
    report.write_table(std::cout, ma, mb);
    return kOk;
  });
}

}  // namespace flowrt::cli
