#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dsa/cluster.hpp"
#include "dsa/config.hpp"
#include "dsa/mapreduce.hpp"

namespace dsa {

// 1 / ((1 - p) + p / n), evaluated as n / (n(1 - p) + p).
double amdahl_speedup(double p, std::uint64_t n);

struct OverheadReport {
  double p = 0;
  bool p_estimated = false;
  FractionReading reading = FractionReading::kParallel;
  std::uint64_t n = 1;
  double speedup = 1;
  double comm_cost_fraction = 0;
  double threshold = 0;  // p/S, or (1-p)/S under the serial reading
  bool beneficial = true;
};

// Estimated parallel fraction: node steps / (node steps + coordinator events).
double estimate_parallel_fraction(const ExperimentTrace& trace);

// comm_cost_fraction = messages_sent x per_message_cost / total steps.
// When `p` is absent it is estimated from the trace.
OverheadReport overhead_analysis(const ExperimentTrace& trace, std::optional<double> p,
                                 std::uint64_t n, double per_message_cost,
                                 FractionReading reading = FractionReading::kParallel);

struct RunReport {
  std::uint64_t seed = 0;
  double t0 = 0;
  bool t0_calibrated = false;
  std::optional<double> initial_best_energy;
  std::optional<double> final_best_energy;
  // Times the coordinator record improved after it was first set.
  std::uint64_t global_best_improvements = 0;
  std::optional<std::uint64_t> first_global_basin_tick;
  // skewed1d only: final record inside the global basin, and how many live
  // searchers end with their own best there.
  bool final_in_global_basin = false;
  std::uint32_t searchers_in_global_basin = 0;
  std::uint32_t live_searchers = 0;
  std::array<std::uint64_t, kMessageKindCount> sent{};
  std::array<std::uint64_t, kMessageKindCount> delivered{};
  std::uint64_t messages_sent = 0;
  std::uint64_t dropped = 0;
  std::uint64_t corrupted = 0;
  std::uint64_t corruptions_detected = 0;
  std::uint64_t faults_applied = 0;
  std::uint64_t sanctions = 0;
  std::uint64_t flags = 0;
  std::uint64_t promotions = 0;
  std::uint64_t activations = 0;
  std::uint64_t deaths_detected = 0;
  std::uint64_t coordinator_events = 0;
  std::uint64_t ticks = 0;
  bool completed = false;
  std::uint64_t total_steps = 0;
  OverheadReport overhead;
};

struct ExperimentResult {
  RunReport report;
  ExperimentTrace trace;
};

// Runs one experiment on `seed` (config.seed when absent). t0 is calibrated
// from a warmup walk unless the config pins it.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                std::optional<std::uint64_t> seed = std::nullopt);

// Counters rebuilt from nothing but the event log.
Counters recount(const std::vector<LogRecord>& log);

struct Quantiles {
  std::size_t count = 0;
  double min = 0;
  double q25 = 0;
  double median = 0;
  double q75 = 0;
  double max = 0;
};

// Linear interpolation between order statistics. Empty input gives count 0.
Quantiles quantiles(std::vector<double> values);

struct SweepFailure {
  std::uint64_t seed = 0;
  std::string error;
};

struct SweepReport {
  std::vector<RunReport> runs;  // ascending seed
  std::vector<SweepFailure> failures;
  Quantiles final_best_energy;
  Quantiles first_global_basin_tick;
  Quantiles messages_sent;
  Quantiles dropped;
  Quantiles faults_applied;
  Quantiles sanctions;
  std::size_t basin_hits = 0;           // runs whose record ever entered the global basin
  std::size_t final_basin_hits = 0;     // runs ending with the record in the global basin
  std::uint64_t searchers_in_basin = 0;  // summed over runs
  std::uint64_t searchers_total = 0;
};

// Seeds config.seed .. config.seed + count - 1, on up to config.threads
// workers. Aggregation is by seed, so thread count never changes the result.
SweepReport run_sweep(const ExperimentConfig& config, std::uint32_t count);

std::string report_json(const RunReport& report);
std::string sweep_json(const SweepReport& sweep);

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows);
void write_trace_json(std::ostream& out, const std::vector<TraceRow>& rows);
// Commented header, the first coordinator record, then one row per
// improvement on it.
void write_convergence(std::ostream& out, const ExperimentTrace& trace);

// trace.csv or trace.json, report.json, convergence.dat and events.log.
void emit_outputs(const RunReport& report, const ExperimentTrace& trace,
                  const std::string& dir, const std::string& format);

// sweep.csv (one row per run) and sweep.json.
void emit_sweep(const SweepReport& sweep, const std::string& dir);

struct VerifyReport {
  std::size_t tasks = 0;
  std::vector<std::uint64_t> failed_tasks;
  std::size_t store_size = 0;
  std::vector<std::uint64_t> planted;  // digests of deliberately corrupted entries
  std::vector<Mismatch> mismatches;
  std::optional<ReduceResult> best;
  std::size_t true_positives = 0;
};

// Map phase, store, optional planted corruption, verification and reduce.
// The store survives so it can be dumped.
VerifyReport run_verify(const ExperimentConfig& config, IntermediateStore& store);

std::string verify_json(const VerifyReport& report);

struct OracleReport {
  std::string problem;
  Optimum optimum;
};

OracleReport run_oracle(const ExperimentConfig& config);
std::string oracle_json(const OracleReport& report);

}  // namespace dsa
