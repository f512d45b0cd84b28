#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "bflab/csv.hpp"
#include "bflab/harness/config.hpp"

namespace bflab::harness {

// Raised for an unknown experiment id; the message lists the catalog.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// One thresholded quantity: pass iff `value relation threshold`.
struct Check {
  std::string name;
  double value = 0.0;
  std::string relation;
  double threshold = 0.0;
  bool pass = false;
};

struct ExperimentResult {
  // File name and exact contents, in write order.
  std::vector<std::pair<std::string, std::string>> outputs;
  std::vector<Check> checks;

  void add_csv(const std::string& name, const CsvTable& table);
  void add_text(const std::string& name, std::string contents);
  // relation is one of "<", "<=", ">", ">=", "==".
  const Check& check(const std::string& name, double value, const std::string& relation,
                     double threshold);
  bool passed() const;
  CsvTable checks_csv() const;
};

struct RunContext {
  // Cap on worker threads for independent sub-runs.
  int jobs = 1;
};

struct ExperimentInfo {
  std::string id;
  std::string description;
  std::vector<ParamSpec> schema;
  // Cross-field constraints beyond the per-field schema; throws ConfigError.
  std::function<void(const Params&)> validate;
  std::function<ExperimentResult(const Params&, const RunContext&)> run;
};

const std::vector<ExperimentInfo>& catalog();
// Throws UsageError listing the catalog for an unknown id.
const ExperimentInfo& find_experiment(const std::string& id);
// Every id with its description and parameters with defaults.
std::string list_experiments();

// Runs fn(0..count-1) on at most jobs threads; the first exception is rethrown.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn);

}  // namespace bflab::harness
