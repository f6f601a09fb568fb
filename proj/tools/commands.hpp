#pragma once

#include <cstdint>
#include <string>

namespace bate::cli {

// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

struct SimulateOptions {
  std::string preset;
  std::string config_path;
  int runs_override = -1;
  std::int64_t seed_override = -1;
  bool seed_set = false;
  std::string filter = "both";
  std::string out_dir = "bate-out";
  std::string series = "first";
  bool dump_config = false;
};

struct ObservabilityOptions {
  std::string preset;
  std::string config_path;
  std::string window_path;
  int samples = 10;
  int target_order = -1;
  std::string out_path;
  bool dump_config = false;
};

struct EstimateOptions {
  std::string preset;
  std::string config_path;
  std::string measurements_path;
  std::string observer_path;
  std::string filter = "bearing_angle";
  std::string out_path = "estimates.csv";
};

int cmd_simulate(const SimulateOptions& opts);
int cmd_observability(const ObservabilityOptions& opts);
int cmd_estimate(const EstimateOptions& opts);

}  // namespace bate::cli
