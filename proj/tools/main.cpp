#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bflab/csv.hpp"
#include "bflab/harness/config.hpp"
#include "bflab/harness/experiments.hpp"
#include "bflab/harness/runner.hpp"

namespace h = bflab::harness;

namespace {

int run_command(const std::string& config_path, const std::vector<std::string>& sets, int jobs) {
  h::ExperimentConfig config;
  if (!config_path.empty()) config = h::load_config(config_path);
  // The experiment id must be known before parameter overrides can be typed.
  for (const auto& s : sets)
    if (s.rfind("experiment=", 0) == 0) h::apply_override(config, s);
  for (const auto& s : sets)
    if (s.rfind("experiment=", 0) != 0) h::apply_override(config, s);
  if (config.id.empty()) throw h::ConfigError("experiment", "missing (use --config or --set experiment=<id>)");
  if (jobs > 0) config.jobs = jobs;

  const auto m = h::run_experiment(config);
  for (const auto& c : m.checks)
    std::printf("%s %-45s %s %s %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                bflab::fmt17(c.value).c_str(), c.relation.c_str(), bflab::fmt17(c.threshold).c_str());
  std::printf("%s: %zu outputs in %s (%.2f s), config %s\n", m.experiment.c_str(), m.outputs.size(),
              m.output_dir.string().c_str(), m.wall_seconds, m.config_hash.c_str());
  return m.passed() ? h::kExitOk : h::kExitThreshold;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bflab: biharmonic heat kernels, weighted norms and Calabi flow experiments"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> sets;
  int jobs = 0;
  auto* run = app.add_subcommand("run", "run one experiment and write its CSV outputs and manifest");
  run->add_option("--config", config_path, "TOML experiment config")->check(CLI::ExistingFile);
  run->add_option("--set", sets, "override key=value (repeatable)");
  run->add_option("--jobs", jobs, "cap on worker threads")->check(CLI::PositiveNumber);
  auto* list = app.add_subcommand("list", "print the experiment catalog");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : h::kExitUsage;
  }
  try {
    if (list->parsed()) {
      std::cout << h::list_experiments();
      return h::kExitOk;
    }
    return run_command(config_path, sets, jobs);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "bflab: %s\n", e.what());
    return h::exit_code_for_current_exception();
  }
}
