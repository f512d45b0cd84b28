#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "bflab/harness/config.hpp"
#include "bflab/harness/experiments.hpp"

namespace bflab::harness {

// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a64_hex(std::string_view bytes);

std::string version_string();

struct OutputRecord {
  std::string name;
  std::string checksum;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string experiment;
  std::string config_hash;
  std::string version;
  std::filesystem::path output_dir;
  std::vector<OutputRecord> outputs;
  std::vector<Check> checks;
  double wall_seconds = 0.0;

  bool passed() const;
  // Keys config_hash, version, outputs, wall_seconds, plus experiment and checks.
  std::string to_json() const;
};

// BFLAB_OUT, when set and nonempty, replaces the configured directory.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config);

// Resolves the config, runs the experiment, and writes every output, checks.csv
// and manifest.json. Numerical failures leave failure.txt and are rethrown.
RunManifest run_experiment(ExperimentConfig config);

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitNumerical = 3, kExitThreshold = 4 };
// Exit code for the exception currently being handled.
int exit_code_for_current_exception();

}  // namespace bflab::harness
