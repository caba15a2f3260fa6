#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dsa/anneal.hpp"
#include "dsa/cluster.hpp"
#include "dsa/errors.hpp"
#include "dsa/faults.hpp"
#include "dsa/mapreduce.hpp"
#include "dsa/problem.hpp"
#include "dsa/tolerance.hpp"

namespace dsa {

// Every problem found while validating a config, each prefixed with its key
// path ("cluster.fabric.loss_probability: ...").
class ConfigError : public ValidationError {
 public:
  explicit ConfigError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

struct ProblemSpec {
  ProblemKind kind = ProblemKind::kTsp;
  std::optional<std::string> instance_path;
  std::vector<City> cities;          // inline TSP
  std::optional<JobShopInstance> jobshop;  // inline job shop
  std::size_t random_n = 8;          // generated TSP when nothing else given
  std::uint64_t random_seed = 7;
};

ProblemPtr make_problem(const ProblemSpec& spec);

enum class FractionReading { kParallel, kSerial };

struct AmdahlSpec {
  std::optional<double> parallel_fraction;  // estimated from the trace when absent
  FractionReading reading = FractionReading::kParallel;
};

struct OutputSpec {
  std::string dir = "out";
  std::string format = "csv";  // csv | json
};

struct TaskSpec {
  std::uint64_t id = 0;
  std::uint64_t seed = 0;
  std::uint64_t budget = 0;
};

struct MapReduceSpec {
  std::uint32_t tasks = 8;
  std::uint64_t budget = 1'000'000;
  unsigned threads = 1;
  double corrupt_fraction = 0;
  std::vector<TaskSpec> task_list;  // overrides `tasks` when non-empty
};

struct ExperimentConfig {
  ProblemSpec problem;
  AnnealParams params;
  bool t0_given = false;
  std::uint32_t warmup_steps = 500;
  ClusterConfig cluster;
  FaultScenario scenario;
  ToleranceConfig tolerance;
  std::uint64_t seed = 1;
  std::uint32_t seeds = 1;
  std::uint64_t budget_ticks = 1'000'000;
  unsigned threads = 1;
  AmdahlSpec amdahl;
  OutputSpec output;
  MapReduceSpec mapreduce;
};

// Relative instance/scenario paths resolve against `base_dir`.
ExperimentConfig parse_config_text(const std::string& text, const std::string& base_dir = ".");
ExperimentConfig parse_config(const std::string& path);

FaultScenario parse_scenario_text(const std::string& text);
FaultScenario load_scenario_file(const std::string& path);

}  // namespace dsa
