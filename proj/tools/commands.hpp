// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace flowrt::cli {

// Exit statuses.
constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

struct Options {
  std::string workflow;
  std::string cluster;
  std::string placement = "roundrobin";
  std::string pattern = "open:10rpm:60s";
  std::string input = "4MiB";
  std::size_t fan = 4;
  std::int64_t memory_mb = 128;
  std::uint64_t seed = 1;
  double alpha = 1.1;
  std::string ttl = "30s";
  std::string out = "flowrt-out";
  std::string mode = "dataflow";
  bool verify = false;
  bool no_events = false;

  // sweep
  std::string param = "fan";
  std::vector<std::string> values;
};

int cmd_validate(const std::string& path);
int cmd_run(const Options& o);
int cmd_compare(const Options& o);
int cmd_sweep(const Options& o);
int cmd_report(const std::string& dir);

}  // namespace flowrt::cli
