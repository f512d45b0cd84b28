#include "bflab/harness/runner.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "bflab/calabi.hpp"
#include "bflab/csv.hpp"
#include "bflab/errors.hpp"

#ifndef BFLAB_VERSION
#define BFLAB_VERSION "0.0.0"
#endif

namespace bflab::harness {

namespace {

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << contents;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string canonical_config(const ExperimentConfig& c) {
  return "experiment = \"" + c.id + "\"\n\n[parameters]\n" + c.parameters.canonical();
}

}  // namespace

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string version_string() { return BFLAB_VERSION; }

bool RunManifest::passed() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["experiment"] = experiment;
  j["config_hash"] = config_hash;
  j["version"] = version;
  j["outputs"] = nlohmann::ordered_json::array();
  for (const auto& o : outputs)
    j["outputs"].push_back({{"name", o.name}, {"checksum", o.checksum}, {"bytes", o.bytes}});
  j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : checks)
    j["checks"].push_back({{"name", c.name},
                           {"value", fmt17(c.value)},
                           {"relation", c.relation},
                           {"threshold", fmt17(c.threshold)},
                           {"pass", c.pass}});
  j["passed"] = passed();
  j["wall_seconds"] = wall_seconds;
  return j.dump(2) + "\n";
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& config) {
  if (const char* env = std::getenv("BFLAB_OUT"); env && *env) return env;
  return config.output_dir;
}

RunManifest run_experiment(ExperimentConfig config) {
  resolve(config);
  const auto& info = find_experiment(config.id);
  const auto dir = resolve_output_dir(config);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw ConfigError("output_dir", "cannot create " + dir.string());

  RunManifest m;
  m.experiment = config.id;
  m.config_hash = fnv1a64_hex(canonical_config(config));
  m.version = version_string();
  m.output_dir = dir;
  write_file(dir / "config.resolved.toml", canonical_config(config));

  const auto start = std::chrono::steady_clock::now();
  ExperimentResult result;
  try {
    result = info.run(config.parameters, RunContext{config.jobs});
  } catch (const std::exception& e) {
    write_file(dir / "failure.txt", config.id + ": " + e.what() + "\n");
    throw;
  }
  m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  result.add_csv("checks.csv", result.checks_csv());
  for (const auto& [name, contents] : result.outputs) {
    write_file(dir / name, contents);
    m.outputs.push_back({name, fnv1a64_hex(contents), contents.size()});
  }
  m.checks = result.checks;
  write_file(dir / "manifest.json", m.to_json());
  return m;
}

int exit_code_for_current_exception() {
  try {
    throw;
  } catch (const DeltaBandViolation&) {
    return kExitUsage;
  } catch (const ConfigError&) {
    return kExitUsage;
  } catch (const UsageError&) {
    return kExitUsage;
  } catch (const NumericalFailure&) {
    return kExitNumerical;
  } catch (const NoContraction&) {
    return kExitNumerical;
  } catch (const InsufficientData&) {
    return kExitNumerical;
  } catch (const ResolutionError&) {
    return kExitNumerical;
  } catch (const std::invalid_argument&) {
    return kExitUsage;
  } catch (...) {
    return kExitNumerical;
  }
}

}  // namespace bflab::harness
