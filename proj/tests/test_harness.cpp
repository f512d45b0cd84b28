#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "bflab/calabi.hpp"
#include "bflab/errors.hpp"
#include "bflab/harness/config.hpp"
#include "bflab/harness/experiments.hpp"
#include "bflab/harness/runner.hpp"

namespace {

namespace h = bflab::harness;
namespace fs = std::filesystem;

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("bflab_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Harness, Fnv1aKnownVectors) {
  EXPECT_EQ(h::fnv1a64_hex(""), "cbf29ce484222325");
  EXPECT_EQ(h::fnv1a64_hex("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(h::fnv1a64_hex("foobar"), "85944171f73967e8");
}

TEST(Harness, CatalogHasTenDistinctIds) {
  const std::set<std::string> expected{"kernel-mass",     "kernel-decay",        "nu-limit",      "smoothing-rates",
                                       "schauder-ratio",  "parametrix-validate", "neumann-decay", "flow-run",
                                       "fixed-point",     "solver-agreement"};
  std::set<std::string> ids;
  for (const auto& e : h::catalog()) ids.insert(e.id);
  EXPECT_EQ(ids, expected);
  EXPECT_EQ(h::catalog().size(), 10u);
  const auto listing = h::list_experiments();
  for (const auto& id : expected) EXPECT_NE(listing.find(id), std::string::npos);
}

TEST(Harness, EveryDefaultConfigResolves) {
  for (const auto& e : h::catalog()) {
    h::ExperimentConfig c;
    c.id = e.id;
    EXPECT_NO_THROW(h::resolve(c)) << e.id;
    EXPECT_EQ(c.output_dir, fs::path("out") / e.id);
  }
}

TEST(Harness, UnknownExperimentListsCatalog) {
  try {
    h::find_experiment("nope");
    FAIL();
  } catch (const h::UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("available: kernel-mass"), std::string::npos);
  }
}

TEST(Harness, ParseConfigAndOverrides) {
  auto c = h::parse_config("experiment = \"kernel-mass\"\njobs = 2\n[parameters]\ngrid = 64\n");
  EXPECT_EQ(c.id, "kernel-mass");
  EXPECT_EQ(c.jobs, 2);
  h::apply_override(c, "parameters.grid=32");
  h::apply_override(c, "output_dir=/tmp/x");
  h::resolve(c);
  EXPECT_EQ(c.parameters.get_int("grid"), 32);
  EXPECT_EQ(c.output_dir, fs::path("/tmp/x"));
}

TEST(Harness, ConfigErrorsCarryFieldPaths) {
  auto field_of = [](const std::function<void()>& fn) -> std::string {
    try {
      fn();
    } catch (const h::ConfigError& e) {
      return e.field();
    }
    return "<no error>";
  };
  EXPECT_EQ(field_of([] { h::parse_config("experiment = \"kernel-mass\"\nbogus = 1\n"); }), "bogus");
  EXPECT_EQ(field_of([] { h::parse_config("[parameters]\ngrid = 8\n"); }), "experiment");
  EXPECT_EQ(field_of([] {
              auto c = h::parse_config("experiment = \"kernel-mass\"\n[parameters]\ngrid = 48\n");
              h::resolve(c);
            }),
            "parameters.grid");
  EXPECT_EQ(field_of([] {
              auto c = h::parse_config("experiment = \"kernel-mass\"\n[parameters]\nnot_a_param = 1\n");
              h::resolve(c);
            }),
            "parameters.not_a_param");
  EXPECT_EQ(field_of([] {
              auto c = h::parse_config("experiment = \"kernel-mass\"\n[parameters]\ngrid = \"big\"\n");
              h::resolve(c);
            }),
            "parameters.grid");
  EXPECT_EQ(field_of([] {
              h::ExperimentConfig c;
              c.id = "kernel-mass";
              h::apply_override(c, "grid=abc");
            }),
            "parameters.grid");
  EXPECT_EQ(field_of([] { h::parse_config("experiment = \n"); }), "<string>");
}

TEST(Harness, ParseValueTypes) {
  EXPECT_EQ(std::get<bool>(h::parse_value("true", h::ParamType::Bool, "f")), true);
  EXPECT_EQ(std::get<std::int64_t>(h::parse_value(" 12 ", h::ParamType::Int, "f")), 12);
  EXPECT_EQ(std::get<double>(h::parse_value("2.5e-3", h::ParamType::Double, "f")), 2.5e-3);
  EXPECT_EQ(std::get<std::vector<double>>(h::parse_value("[1, 2.5]", h::ParamType::DoubleList, "f")),
            (std::vector<double>{1.0, 2.5}));
  EXPECT_THROW(h::parse_value("1.5", h::ParamType::Int, "f"), h::ConfigError);
  EXPECT_THROW(h::parse_value("[1, x]", h::ParamType::DoubleList, "f"), h::ConfigError);
}

TEST(Harness, RunWritesManifestAndIsDeterministic) {
  const auto dir_a = temp_dir("a"), dir_b = temp_dir("b");
  h::ExperimentConfig c;
  c.id = "kernel-mass";
  c.parameters.set("grid", std::int64_t(32));
  c.output_dir = dir_a;
  const auto ma = h::run_experiment(c);
  c.output_dir = dir_b;
  const auto mb = h::run_experiment(c);
  ASSERT_EQ(ma.outputs.size(), mb.outputs.size());
  for (std::size_t i = 0; i < ma.outputs.size(); ++i) {
    EXPECT_EQ(ma.outputs[i].name, mb.outputs[i].name);
    EXPECT_EQ(ma.outputs[i].checksum, mb.outputs[i].checksum) << ma.outputs[i].name;
    EXPECT_EQ(h::fnv1a64_hex(read_file(dir_a / ma.outputs[i].name)), ma.outputs[i].checksum);
  }
  EXPECT_EQ(ma.config_hash, mb.config_hash);
  const auto j = nlohmann::json::parse(read_file(dir_a / "manifest.json"));
  for (const char* key : {"config_hash", "version", "outputs", "wall_seconds"}) EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["version"], h::version_string());
  EXPECT_TRUE(fs::exists(dir_a / "config.resolved.toml"));
  EXPECT_TRUE(fs::exists(dir_a / "checks.csv"));
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST(Harness, OutputDirectoryEnvironmentOverride) {
  const auto dir = temp_dir("env");
  ::setenv("BFLAB_OUT", dir.c_str(), 1);
  h::ExperimentConfig c;
  c.id = "kernel-mass";
  c.output_dir = "/nonexistent/should/not/be/used";
  EXPECT_EQ(h::resolve_output_dir(c), dir);
  ::unsetenv("BFLAB_OUT");
  EXPECT_EQ(h::resolve_output_dir(c), fs::path("/nonexistent/should/not/be/used"));
}

TEST(Harness, DeltaBandViolationIsAUsageExit) {
  const auto dir = temp_dir("delta");
  h::ExperimentConfig c;
  c.id = "flow-run";
  h::apply_override(c, "amplitude=0.2");
  h::apply_override(c, "seeds=[1]");
  c.output_dir = dir;
  try {
    h::run_experiment(c);
    FAIL() << "expected a delta-band violation";
  } catch (...) {
    EXPECT_EQ(h::exit_code_for_current_exception(), h::kExitUsage);
  }
  EXPECT_NE(read_file(dir / "failure.txt").find("delta-band check failed"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Harness, ExitCodeMapping) {
  auto code = [](auto ex) {
    try {
      throw ex;
    } catch (...) {
      return h::exit_code_for_current_exception();
    }
  };
  EXPECT_EQ(code(h::ConfigError("x", "y")), h::kExitUsage);
  EXPECT_EQ(code(h::UsageError("x")), h::kExitUsage);
  EXPECT_EQ(code(bflab::NumericalFailure("x")), h::kExitNumerical);
  EXPECT_EQ(code(bflab::NoContraction("x")), h::kExitNumerical);
  EXPECT_EQ(code(std::runtime_error("x")), h::kExitNumerical);
}

TEST(Harness, ParallelForRethrowsAndCoversRange) {
  std::vector<int> hits(50, 0);
  h::parallel_for(50, 4, [&](int i) { hits[i] += 1; });
  for (int v : hits) EXPECT_EQ(v, 1);
  EXPECT_THROW(h::parallel_for(10, 3, [](int i) {
                 if (i == 7) throw std::runtime_error("boom");
               }),
               std::runtime_error);
}

}  // namespace
