// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

using flowrt::cli::Options;

namespace {

void add_workload_flags(CLI::App& cmd, Options& o) {
  cmd.add_option("--workflow", o.workflow, "Builtin name (wc, chain, switch3, diamond) or .flow path")
      ->required();
  cmd.add_option("--cluster", o.cluster, "Cluster JSON document (default: three 16-core nodes)");
  cmd.add_option("--placement", o.placement, "roundrobin | single | file:<path>")
      ->capture_default_str();
  cmd.add_option("--pattern", o.pattern,
                 "open:<rpm>:<dur> | closed:<clients>:<dur> | burst:<lo>:<hi>:<t>")
      ->capture_default_str();
  cmd.add_option("--input", o.input, "Request input size (B, KiB, MiB)")->capture_default_str();
  cmd.add_option("--fan", o.fan, "Fan-out of wc, length of chain")->capture_default_str();
  cmd.add_option("--memory", o.memory_mb, "Container memory of builtin workflows, MB")
      ->capture_default_str();
  cmd.add_option("--seed", o.seed, "Seed of inputs and jitter")->capture_default_str();
  cmd.add_option("--alpha", o.alpha, "Pressure amplification factor")->capture_default_str();
  cmd.add_option("--ttl", o.ttl, "Sink entry time-to-live before spilling")->capture_default_str();
  cmd.add_option("--out", o.out, "Output directory")->capture_default_str();
  cmd.add_flag("--verify", o.verify, "Check every output against the reference evaluation");
  cmd.add_flag("--no-events", o.no_events, "Skip the event log");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flowrt: data-flow serverless workflow runtime simulator"};
  app.require_subcommand(1);
  Options o;
  std::string validate_path;
  std::string report_dir;

  auto* validate = app.add_subcommand("validate", "Check a workflow document");
  validate->add_option("file", validate_path, "Workflow file")->required();

  auto* run = app.add_subcommand("run", "Run one experiment and write metrics");
  add_workload_flags(*run, o);
  run->add_option("--mode", o.mode, "dataflow | controlflow | both")
      ->check(CLI::IsMember({"dataflow", "controlflow", "both"}))
      ->capture_default_str();

  auto* compare = app.add_subcommand("compare", "Run both modes on one seed and compare");
  add_workload_flags(*compare, o);

  auto* sweep = app.add_subcommand("sweep", "Run both modes over a parameter grid");
  add_workload_flags(*sweep, o);
  sweep->add_option("--param", o.param, "fan | input | memory | clients")
      ->check(CLI::IsMember({"fan", "input", "memory", "clients"}))
      ->capture_default_str();
  sweep->add_option("--values", o.values, "Grid values, comma separated")
      ->delimiter(',')
      ->required();

  auto* report = app.add_subcommand("report", "Compare the summaries in an output directory");
  report->add_option("dir", report_dir, "Directory written by run --mode both or compare")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return flowrt::cli::kUsage;
  }

  if (*validate) return flowrt::cli::cmd_validate(validate_path);
  if (*run) return flowrt::cli::cmd_run(o);
  if (*compare) return flowrt::cli::cmd_compare(o);
  if (*sweep) return flowrt::cli::cmd_sweep(o);
  if (*report) return flowrt::cli::cmd_report(report_dir);
  return flowrt::cli::kUsage;
}
