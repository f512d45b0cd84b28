#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace bflab::harness {

// Malformed or out-of-schema configuration; what() starts with the field path.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& field, const std::string& message);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class ParamType { Bool, Int, Double, String, DoubleList };
std::string to_string(ParamType t);

using ParamValue = std::variant<bool, std::int64_t, double, std::string, std::vector<double>>;

struct ParamSpec {
  std::string key;
  ParamType type = ParamType::Double;
  ParamValue fallback;
  std::string description;
  // Inclusive bounds on numbers and on every list entry.
  double min = -1e300;
  double max = 1e300;
  bool power_of_two = false;
};

// Typed parameter map. Getters throw ConfigError on a missing key or wrong type.
class Params {
 public:
  bool contains(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, ParamValue value) { values_[key] = std::move(value); }
  const std::map<std::string, ParamValue>& values() const { return values_; }

  bool get_bool(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  const std::string& get_string(const std::string& key) const;
  const std::vector<double>& get_list(const std::string& key) const;

  // One `key = value` line per entry in key order, numbers at 17 digits.
  std::string canonical() const;

 private:
  std::map<std::string, ParamValue> values_;
};

std::string format_value(const ParamValue& v);

// Converts text to the schema type; `field` names the source for errors.
ParamValue parse_value(const std::string& text, ParamType type, const std::string& field);

struct ExperimentConfig {
  std::string id;
  Params parameters;
  std::filesystem::path output_dir;
  int jobs = 1;
};

// TOML layout: experiment = "<id>", optional output_dir and jobs, and a
// [parameters] table. Unknown keys are rejected.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& toml_text, const std::string& source = "<string>");

// `key=value` with key one of experiment, output_dir, jobs, or a parameter
// name (optionally prefixed by "parameters.").
void apply_override(ExperimentConfig& config, const std::string& assignment);

// Fills defaults from the schema of config.id and validates every field.
// Throws ConfigError naming the offending field path.
void resolve(ExperimentConfig& config);

}  // namespace bflab::harness
