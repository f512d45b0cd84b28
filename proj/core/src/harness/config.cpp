#include "bflab/harness/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <toml.hpp>

#include "bflab/csv.hpp"
#include "bflab/harness/experiments.hpp"

namespace bflab::harness {

namespace {

template <class T>
const T& get_as(const std::map<std::string, ParamValue>& m, const std::string& key,
                const char* type) {
  const auto it = m.find(key);
  if (it == m.end()) throw ConfigError("parameters." + key, "missing");
  if (const T* v = std::get_if<T>(&it->second)) return *v;
  throw ConfigError("parameters." + key, std::string("expected ") + type);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, const std::string& field) {
  const std::string t = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ConfigError(field, "expected a number, got '" + text + "'");
  }
  if (used != t.size() || !std::isfinite(v))
    throw ConfigError(field, "expected a finite number, got '" + text + "'");
  return v;
}

ParamValue from_toml(const toml::node& node, const std::string& field) {
  if (auto b = node.as_boolean()) return b->get();
  if (auto i = node.as_integer()) return std::int64_t(i->get());
  if (auto f = node.as_floating_point()) return f->get();
  if (auto s = node.as_string()) return s->get();
  if (auto a = node.as_array()) {
    std::vector<double> out;
    for (std::size_t k = 0; k < a->size(); ++k) {
      const auto& e = *a->get(k);
      if (auto i = e.as_integer()) out.push_back(double(i->get()));
      else if (auto f = e.as_floating_point()) out.push_back(f->get());
      else throw ConfigError(field + "[" + std::to_string(k) + "]", "expected a number");
    }
    return out;
  }
  throw ConfigError(field, "unsupported value type");
}

const ParamSpec* find_spec(const ExperimentInfo& info, const std::string& key) {
  for (const auto& s : info.schema)
    if (s.key == key) return &s;
  return nullptr;
}

ParamValue coerce(const ParamValue& v, const ParamSpec& spec, const std::string& field) {
  const auto fail = [&] { throw ConfigError(field, "expected " + to_string(spec.type)); };
  switch (spec.type) {
    case ParamType::Bool:
      if (!std::holds_alternative<bool>(v)) fail();
      return v;
    case ParamType::Int:
      if (!std::holds_alternative<std::int64_t>(v)) fail();
      return v;
    case ParamType::Double:
      if (const auto* i = std::get_if<std::int64_t>(&v)) return double(*i);
      if (!std::holds_alternative<double>(v)) fail();
      return v;
    case ParamType::String:
      if (!std::holds_alternative<std::string>(v)) fail();
      return v;
    case ParamType::DoubleList:
      if (!std::holds_alternative<std::vector<double>>(v)) fail();
      if (std::get<std::vector<double>>(v).empty()) throw ConfigError(field, "list must not be empty");
      return v;
  }
  fail();
  return v;
}

void check_bounds(const ParamValue& v, const ParamSpec& spec, const std::string& field) {
  auto check = [&](double x, const std::string& where) {
    if (x < spec.min || x > spec.max) {
      std::ostringstream os;
      os << "value " << fmt17(x) << " outside [" << fmt17(spec.min) << ", " << fmt17(spec.max) << "]";
      throw ConfigError(where, os.str());
    }
    if (spec.power_of_two) {
      const auto k = std::int64_t(x);
      if (double(k) != x || k < 1 || (k & (k - 1)) != 0)
        throw ConfigError(where, "must be a power of two");
    }
  };
  if (const auto* i = std::get_if<std::int64_t>(&v)) check(double(*i), field);
  if (const auto* d = std::get_if<double>(&v)) check(*d, field);
  if (const auto* l = std::get_if<std::vector<double>>(&v))
    for (std::size_t k = 0; k < l->size(); ++k) check((*l)[k], field + "[" + std::to_string(k) + "]");
}

}  // namespace

ConfigError::ConfigError(const std::string& field, const std::string& message)
    : std::invalid_argument(field + ": " + message), field_(field) {}

std::string to_string(ParamType t) {
  switch (t) {
    case ParamType::Bool: return "boolean";
    case ParamType::Int: return "integer";
    case ParamType::Double: return "number";
    case ParamType::String: return "string";
    case ParamType::DoubleList: return "list of numbers";
  }
  return "?";
}

bool Params::get_bool(const std::string& key) const { return get_as<bool>(values_, key, "boolean"); }
std::int64_t Params::get_int(const std::string& key) const {
  return get_as<std::int64_t>(values_, key, "integer");
}
double Params::get_double(const std::string& key) const {
  return get_as<double>(values_, key, "number");
}
const std::string& Params::get_string(const std::string& key) const {
  return get_as<std::string>(values_, key, "string");
}
const std::vector<double>& Params::get_list(const std::string& key) const {
  return get_as<std::vector<double>>(values_, key, "list of numbers");
}

std::string format_value(const ParamValue& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, bool>) return x ? "true" : "false";
        else if constexpr (std::is_same_v<T, std::int64_t>) return std::to_string(x);
        else if constexpr (std::is_same_v<T, double>) return fmt17(x);
        else if constexpr (std::is_same_v<T, std::string>) return "\"" + x + "\"";
        else {
          std::string s = "[";
          for (std::size_t i = 0; i < x.size(); ++i) s += (i ? ", " : "") + fmt17(x[i]);
          return s + "]";
        }
      },
      v);
}

std::string Params::canonical() const {
  std::string s;
  for (const auto& [k, v] : values_) s += k + " = " + format_value(v) + "\n";
  return s;
}

ParamValue parse_value(const std::string& text, ParamType type, const std::string& field) {
  const std::string t = trim(text);
  switch (type) {
    case ParamType::Bool:
      if (t == "true") return true;
      if (t == "false") return false;
      throw ConfigError(field, "expected true or false, got '" + text + "'");
    case ParamType::Int: {
      std::size_t used = 0;
      long long v = 0;
      try {
        v = std::stoll(t, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != t.size()) throw ConfigError(field, "expected an integer, got '" + text + "'");
      return std::int64_t(v);
    }
    case ParamType::Double: return parse_number(t, field);
    case ParamType::String: {
      if (t.size() >= 2 && t.front() == '"' && t.back() == '"') return t.substr(1, t.size() - 2);
      return t;
    }
    case ParamType::DoubleList: {
      std::string body = t;
      if (!body.empty() && body.front() == '[') {
        if (body.back() != ']') throw ConfigError(field, "unterminated list '" + text + "'");
        body = body.substr(1, body.size() - 2);
      }
      std::vector<double> out;
      std::stringstream ss(body);
      std::string item;
      int k = 0;
      while (std::getline(ss, item, ','))
        out.push_back(parse_number(item, field + "[" + std::to_string(k++) + "]"));
      if (out.empty()) throw ConfigError(field, "list must not be empty");
      return out;
    }
  }
  throw ConfigError(field, "unsupported type");
}

ExperimentConfig parse_config(const std::string& toml_text, const std::string& source) {
  toml::table tbl;
  try {
    tbl = toml::parse(toml_text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << e.description() << " (line " << e.source().begin.line << ")";
    throw ConfigError(source, os.str());
  }
  ExperimentConfig c;
  for (auto&& [key, node] : tbl) {
    const std::string k(key.str());
    if (k == "experiment") {
      if (!node.is_string()) throw ConfigError("experiment", "expected string");
      c.id = *node.value<std::string>();
    } else if (k == "output_dir") {
      if (!node.is_string()) throw ConfigError("output_dir", "expected string");
      c.output_dir = *node.value<std::string>();
    } else if (k == "jobs") {
      if (!node.is_integer()) throw ConfigError("jobs", "expected integer");
      c.jobs = int(*node.value<std::int64_t>());
    } else if (k == "parameters") {
      const auto* p = node.as_table();
      if (!p) throw ConfigError("parameters", "expected a table");
      for (auto&& [pk, pv] : *p) {
        const std::string name(pk.str());
        c.parameters.set(name, from_toml(pv, "parameters." + name));
      }
    } else {
      throw ConfigError(k, "unknown key (experiment, output_dir, jobs, [parameters])");
    }
  }
  if (c.id.empty()) throw ConfigError("experiment", "missing");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), "cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

void apply_override(ExperimentConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("--set", "expected key=value, got '" + assignment + "'");
  std::string key = trim(assignment.substr(0, eq));
  const std::string value = assignment.substr(eq + 1);
  if (key == "experiment") {
    config.id = trim(value);
    return;
  }
  if (key == "output_dir") {
    config.output_dir = trim(value);
    return;
  }
  if (key == "jobs") {
    config.jobs = int(std::get<std::int64_t>(parse_value(value, ParamType::Int, "jobs")));
    return;
  }
  if (key.rfind("parameters.", 0) == 0) key = key.substr(11);
  const std::string field = "parameters." + key;
  const auto& info = find_experiment(config.id);
  const ParamSpec* spec = find_spec(info, key);
  if (!spec) throw ConfigError(field, "unknown parameter for experiment '" + config.id + "'");
  config.parameters.set(key, parse_value(value, spec->type, field));
}

void resolve(ExperimentConfig& config) {
  if (config.id.empty()) throw ConfigError("experiment", "missing");
  const auto& info = find_experiment(config.id);
  if (config.jobs < 1) throw ConfigError("jobs", "must be >= 1");
  if (config.output_dir.empty()) config.output_dir = std::filesystem::path("out") / config.id;
  for (const auto& [k, v] : config.parameters.values())
    if (!find_spec(info, k))
      throw ConfigError("parameters." + k, "unknown parameter for experiment '" + config.id + "'");
  Params resolved;
  for (const auto& spec : info.schema) {
    const std::string field = "parameters." + spec.key;
    ParamValue v = config.parameters.contains(spec.key) ? config.parameters.values().at(spec.key)
                                                        : spec.fallback;
    v = coerce(v, spec, field);
    check_bounds(v, spec, field);
    resolved.set(spec.key, std::move(v));
  }
  if (info.validate) info.validate(resolved);
  config.parameters = std::move(resolved);
}

}  // namespace bflab::harness
