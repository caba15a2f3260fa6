#include "dsa/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "dsa/text.hpp"
#include "json.hpp"

namespace dsa {

namespace {

using ordered = nlohmann::ordered_json;

ordered number_or_null(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

ordered solution_json(const Solution& s) {
  if (const auto* perm = std::get_if<Permutation>(&s)) return *perm;
  return std::get<double>(s);
}

const char* reading_name(FractionReading r) {
  return r == FractionReading::kParallel ? "p" : "one_minus_p";
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write '" + path.string() + "'");
  return out;
}

void finish_out(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw RuntimeFailure("write failed for '" + path.string() + "'");
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw RuntimeFailure("cannot create '" + dir + "': " + ec.message());
}

ordered quantiles_json(const Quantiles& q) {
  ordered j;
  j["count"] = q.count;
  if (q.count == 0) return j;
  j["min"] = q.min;
  j["q25"] = q.q25;
  j["median"] = q.median;
  j["q75"] = q.q75;
  j["max"] = q.max;
  return j;
}

ordered run_json(const RunReport& r) {
  ordered j;
  j["seed"] = r.seed;
  j["t0"] = r.t0;
  j["t0_source"] = r.t0_calibrated ? "calibrated" : "config";
  j["initial_best_energy"] = number_or_null(r.initial_best_energy);
  j["final_best_energy"] = number_or_null(r.final_best_energy);
  j["global_best_improvements"] = r.global_best_improvements;
  j["first_global_basin_tick"] =
      r.first_global_basin_tick ? ordered(*r.first_global_basin_tick) : ordered(nullptr);
  j["final_in_global_basin"] = r.final_in_global_basin;
  j["live_searchers"] = r.live_searchers;
  j["searchers_in_global_basin"] = r.searchers_in_global_basin;
  ordered sent = ordered::object();
  ordered delivered = ordered::object();
  for (std::size_t k = 0; k < kMessageKindCount; ++k) {
    const char* name = to_string(static_cast<MessageKind>(k));
    sent[name] = r.sent[k];
    delivered[name] = r.delivered[k];
  }
  j["messages_sent"] = r.messages_sent;
  j["sent_by_kind"] = sent;
  j["delivered_by_kind"] = delivered;
  j["dropped"] = r.dropped;
  j["corrupted"] = r.corrupted;
  j["corruptions_detected"] = r.corruptions_detected;
  j["faults_applied"] = r.faults_applied;
  j["sanctions"] = r.sanctions;
  j["flags"] = r.flags;
  j["promotions"] = r.promotions;
  j["activations"] = r.activations;
  j["deaths_detected"] = r.deaths_detected;
  j["coordinator_events"] = r.coordinator_events;
  j["ticks"] = r.ticks;
  j["completed"] = r.completed;
  j["total_steps"] = r.total_steps;
  const auto& o = r.overhead;
  j["overhead"] = {{"p", o.p},
                   {"p_source", o.p_estimated ? "estimated" : "config"},
                   {"reading", reading_name(o.reading)},
                   {"n", o.n},
                   {"speedup", o.speedup},
                   {"comm_cost_fraction", o.comm_cost_fraction},
                   {"threshold", o.threshold},
                   {"beneficial", o.beneficial}};
  return j;
}

std::vector<MapTask> build_tasks(const ExperimentConfig& config, const ProblemPtr& problem,
                                 const AnnealParams& params) {
  std::vector<MapTask> tasks;
  const auto& m = config.mapreduce;
  if (!m.task_list.empty()) {
    for (const auto& t : m.task_list) {
      tasks.push_back({t.id, problem, params, t.seed, t.budget, false});
    }
    return tasks;
  }
  for (std::uint32_t i = 0; i < m.tasks; ++i) {
    tasks.push_back({i, problem, params, config.seed, m.budget, false});
  }
  return tasks;
}

AnnealParams resolve_params(const ExperimentConfig& config, const Problem& problem,
                            std::uint64_t seed, bool& calibrated) {
  AnnealParams params = config.params;
  calibrated = !config.t0_given;
  if (calibrated) {
    RngStream rng(seed, derive_stream_id(StreamPurpose::kCalibration, 0));
    params.t0 = calibrate_t0(problem, params.p_e0, params.k, config.warmup_steps, rng).t0;
    if (!(params.t0 > params.t_low)) {
      throw RuntimeFailure("calibrated t0 " + format_double(params.t0) +
                           " does not exceed t_low; set anneal.t0 explicitly");
    }
  }
  validate(params);
  return params;
}

}  // namespace

double amdahl_speedup(double p, std::uint64_t n) {
  if (!(p >= 0 && p <= 1)) throw ParameterError("parallel fraction must lie in [0, 1]");
  if (n < 1) throw ParameterError("node count must be >= 1");
  // Evaluated as n / (n(1-p) + p) so that p = 1 gives exactly n.
  const double nd = static_cast<double>(n);
  return nd / (nd * (1.0 - p) + p);
}

double estimate_parallel_fraction(const ExperimentTrace& trace) {
  const double steps = static_cast<double>(trace.total_steps);
  const double coord = static_cast<double>(trace.counters.coordinator_events);
  if (steps + coord == 0) throw RuntimeFailure("degenerate trace: no work recorded");
  return steps / (steps + coord);
}

OverheadReport overhead_analysis(const ExperimentTrace& trace, std::optional<double> p,
                                 std::uint64_t n, double per_message_cost,
                                 FractionReading reading) {
  if (trace.total_steps == 0) throw RuntimeFailure("degenerate trace: zero annealing steps");
  if (per_message_cost < 0) throw ParameterError("per_message_cost must be >= 0");
  OverheadReport r;
  r.p_estimated = !p.has_value();
  r.p = p ? *p : estimate_parallel_fraction(trace);
  r.reading = reading;
  r.n = n;
  r.speedup = amdahl_speedup(r.p, n);
  r.comm_cost_fraction = static_cast<double>(trace.counters.total_sent()) * per_message_cost /
                         static_cast<double>(trace.total_steps);
  const double fraction = reading == FractionReading::kParallel ? r.p : 1.0 - r.p;
  r.threshold = fraction / r.speedup;
  r.beneficial = r.comm_cost_fraction <= r.threshold;
  return r;
}

ExperimentResult run_experiment(const ExperimentConfig& config,
                                std::optional<std::uint64_t> seed_override) {
  const std::uint64_t seed = seed_override.value_or(config.seed);
  try {
    const ProblemPtr problem = make_problem(config.problem);
    bool calibrated = false;
    ClusterConfig cluster = config.cluster;
    cluster.params = resolve_params(config, *problem, seed, calibrated);

    SimState sim = build_cluster(cluster, problem, seed, config.scenario, config.tolerance);
    std::optional<double> initial;
    for (const auto& n : sim.nodes) {
      if (n.chain && (!initial || n.chain->best_energy < *initial)) initial = n.chain->best_energy;
    }

    ExperimentResult out;
    out.trace = run_until_done(sim, config.budget_ticks);
    const auto& t = out.trace;
    RunReport& r = out.report;
    r.seed = seed;
    r.t0 = cluster.params.t0;
    r.t0_calibrated = calibrated;
    r.initial_best_energy = initial;
    if (t.final_best) r.final_best_energy = t.final_best->energy;
    r.first_global_basin_tick = t.first_global_basin_tick;
    if (!t.improvements.empty()) r.global_best_improvements = t.improvements.size() - 1;
    if (problem->kind() == ProblemKind::kSkewed1d) {
      r.final_in_global_basin =
          t.final_best && in_global_basin(std::get<double>(t.final_best->solution));
      for (const auto& n : t.nodes) {
        if (n.best_solution && in_global_basin(std::get<double>(*n.best_solution))) {
          ++r.searchers_in_global_basin;
        }
      }
    }
    for (const auto& n : t.nodes) r.live_searchers += n.role == Role::kSearcher;
    r.sent = t.counters.sent;
    r.delivered = t.counters.delivered;
    r.messages_sent = t.counters.total_sent();
    r.dropped = t.counters.dropped;
    r.corrupted = t.counters.corrupted;
    r.corruptions_detected = t.counters.corruptions_detected;
    r.faults_applied = t.counters.faults_applied;
    r.sanctions = t.counters.sanctions;
    r.flags = t.counters.flags;
    r.promotions = t.counters.promotions;
    r.activations = t.counters.activations;
    r.deaths_detected = t.counters.deaths_detected;
    r.coordinator_events = t.counters.coordinator_events;
    r.ticks = t.ticks;
    r.completed = t.completed;
    r.total_steps = t.total_steps;
    const auto nodes = static_cast<std::uint64_t>(cluster.n_searchers + cluster.n_standby);
    if (t.total_steps > 0) {
      r.overhead = overhead_analysis(t, config.amdahl.parallel_fraction, nodes,
                                     sim.fabric.per_message_cost, config.amdahl.reading);
    }
    return out;
  } catch (const ConfigError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ValidationError("seed " + std::to_string(seed) + ": " + e.what());
  } catch (const ParameterError& e) {
    throw ParameterError("seed " + std::to_string(seed) + ": " + e.what());
  } catch (const RuntimeFailure& e) {
    throw RuntimeFailure("seed " + std::to_string(seed) + ": " + e.what());
  } catch (const StateError& e) {
    throw RuntimeFailure("seed " + std::to_string(seed) + ": " + e.what());
  }
}

Counters recount(const std::vector<LogRecord>& log) {
  Counters c;
  for (const auto& r : log) {
    const auto k = r.kind ? static_cast<std::size_t>(*r.kind) : 0;
    switch (r.event) {
      case LogEvent::kSend:
        ++c.sent[k];
        break;
      case LogEvent::kDeliver:
        ++c.delivered[k];
        if (r.dst == kCoordinator) ++c.coordinator_events;
        break;
      case LogEvent::kIgnore:
        if (r.dst == kCoordinator) ++c.coordinator_events;
        break;
      case LogEvent::kDrop:
        ++c.dropped;
        ++c.faults_applied;
        break;
      case LogEvent::kCorrupt:
        ++c.corrupted;
        ++c.faults_applied;
        break;
      case LogEvent::kCrash:
      case LogEvent::kEccentricOn:
      case LogEvent::kEccentricOff:
        ++c.faults_applied;
        break;
      case LogEvent::kDiscard:
        ++c.corruptions_detected;
        break;
      case LogEvent::kFlag:
        ++c.flags;
        break;
      case LogEvent::kSanction:
        ++c.sanctions;
        break;
      case LogEvent::kPromote:
        ++c.promotions;
        break;
      case LogEvent::kActivate:
        ++c.activations;
        break;
      case LogEvent::kDetectDead:
        ++c.deaths_detected;
        break;
      default:
        break;
    }
  }
  return c;
}

Quantiles quantiles(std::vector<double> values) {
  Quantiles q;
  q.count = values.size();
  if (values.empty()) return q;
  std::sort(values.begin(), values.end());
  auto at = [&](double f) {
    const double pos = f * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return values[lo] + w * (values[hi] - values[lo]);
  };
  q.min = values.front();
  q.q25 = at(0.25);
  q.median = at(0.5);
  q.q75 = at(0.75);
  q.max = values.back();
  return q;
}

SweepReport run_sweep(const ExperimentConfig& config, std::uint32_t count) {
  if (count < 1) throw ParameterError("sweep needs at least one seed");
  std::vector<std::optional<RunReport>> slots(count);
  std::vector<std::string> errors(count);
  std::atomic<std::uint32_t> next{0};

  auto worker = [&] {
    for (std::uint32_t i = next++; i < count; i = next++) {
      try {
        slots[i] = run_experiment(config, config.seed + i).report;
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const unsigned threads = std::clamp<unsigned>(config.threads, 1, count);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  SweepReport s;
  std::vector<double> best, basin, sent, dropped, faults, sanctions;
  for (std::uint32_t i = 0; i < count; ++i) {
    if (!slots[i]) {
      s.failures.push_back({config.seed + i, errors[i]});
      continue;
    }
    const RunReport& r = *slots[i];
    if (r.final_best_energy) best.push_back(*r.final_best_energy);
    if (r.first_global_basin_tick) {
      ++s.basin_hits;
      basin.push_back(static_cast<double>(*r.first_global_basin_tick));
    }
    s.final_basin_hits += r.final_in_global_basin;
    s.searchers_in_basin += r.searchers_in_global_basin;
    s.searchers_total += r.live_searchers;
    sent.push_back(static_cast<double>(r.messages_sent));
    dropped.push_back(static_cast<double>(r.dropped));
    faults.push_back(static_cast<double>(r.faults_applied));
    sanctions.push_back(static_cast<double>(r.sanctions));
    s.runs.push_back(r);
  }
  s.final_best_energy = quantiles(best);
  s.first_global_basin_tick = quantiles(basin);
  s.messages_sent = quantiles(sent);
  s.dropped = quantiles(dropped);
  s.faults_applied = quantiles(faults);
  s.sanctions = quantiles(sanctions);
  return s;
}

std::string report_json(const RunReport& report) { return run_json(report).dump(2) + "\n"; }

std::string sweep_json(const SweepReport& s) {
  ordered j;
  j["runs"] = ordered::array();
  for (const auto& r : s.runs) j["runs"].push_back(run_json(r));
  j["failures"] = ordered::array();
  for (const auto& f : s.failures) j["failures"].push_back({{"seed", f.seed}, {"error", f.error}});
  j["summary"] = {{"final_best_energy", quantiles_json(s.final_best_energy)},
                  {"first_global_basin_tick", quantiles_json(s.first_global_basin_tick)},
                  {"messages_sent", quantiles_json(s.messages_sent)},
                  {"dropped", quantiles_json(s.dropped)},
                  {"faults_applied", quantiles_json(s.faults_applied)},
                  {"sanctions", quantiles_json(s.sanctions)},
                  {"global_basin_entries", s.basin_hits},
                  {"final_global_basin_hits", s.final_basin_hits},
                  {"searchers_in_global_basin", s.searchers_in_basin},
                  {"searchers_total", s.searchers_total}};
  return j.dump(2) + "\n";
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows) {
  out << "tick,global_best_energy,messages_sent,messages_dropped,live_nodes\n";
  for (const auto& r : rows) {
    out << r.tick << ',' << format_double(r.global_best_energy) << ',' << r.messages_sent << ','
        << r.messages_dropped << ',' << r.live_nodes << '\n';
  }
}

void write_trace_json(std::ostream& out, const std::vector<TraceRow>& rows) {
  ordered arr = ordered::array();
  for (const auto& r : rows) {
    arr.push_back({{"tick", r.tick},
                   {"global_best_energy", number_or_null(r.global_best_energy)},
                   {"messages_sent", r.messages_sent},
                   {"messages_dropped", r.messages_dropped},
                   {"live_nodes", r.live_nodes}});
  }
  out << arr.dump(2) << '\n';
}

void write_convergence(std::ostream& out, const ExperimentTrace& trace) {
  out << "# tick global_best_energy\n";
  for (const auto& [tick, energy] : trace.improvements) {
    out << tick << ' ' << format_double(energy) << '\n';
  }
}

void emit_outputs(const RunReport& report, const ExperimentTrace& trace,
                  const std::string& dir, const std::string& format) {
  if (format != "csv" && format != "json") {
    throw ParameterError("format must be csv or json, got '" + format + "'");
  }
  make_dir(dir);
  const std::filesystem::path base(dir);
  {
    const auto path = base / (format == "csv" ? "trace.csv" : "trace.json");
    auto out = open_out(path);
    if (format == "csv") {
      write_trace_csv(out, trace.rows);
    } else {
      write_trace_json(out, trace.rows);
    }
    finish_out(out, path);
  }
  {
    const auto path = base / "report.json";
    auto out = open_out(path);
    out << report_json(report);
    finish_out(out, path);
  }
  {
    const auto path = base / "convergence.dat";
    auto out = open_out(path);
    write_convergence(out, trace);
    finish_out(out, path);
  }
  {
    const auto path = base / "events.log";
    auto out = open_out(path);
    write_event_log(out, trace.log);
    finish_out(out, path);
  }
}

void emit_sweep(const SweepReport& sweep, const std::string& dir) {
  make_dir(dir);
  const std::filesystem::path base(dir);
  {
    const auto path = base / "sweep.csv";
    auto out = open_out(path);
    out << "seed,final_best_energy,first_global_basin_tick,messages_sent,messages_dropped,"
           "faults_applied,sanctions,ticks\n";
    for (const auto& r : sweep.runs) {
      out << r.seed << ','
          << (r.final_best_energy ? format_double(*r.final_best_energy) : std::string("nan"))
          << ','
          << (r.first_global_basin_tick ? std::to_string(*r.first_global_basin_tick)
                                        : std::string())
          << ',' << r.messages_sent << ',' << r.dropped << ',' << r.faults_applied << ','
          << r.sanctions << ',' << r.ticks << '\n';
    }
    finish_out(out, path);
  }
  {
    const auto path = base / "sweep.json";
    auto out = open_out(path);
    out << sweep_json(sweep);
    finish_out(out, path);
  }
}

VerifyReport run_verify(const ExperimentConfig& config, IntermediateStore& store) {
  const ProblemPtr problem = store.problem_ptr();
  bool calibrated = false;
  const AnnealParams params = resolve_params(config, *problem, config.seed, calibrated);
  const auto tasks = build_tasks(config, problem, params);

  VerifyReport v;
  v.tasks = tasks.size();
  const MapOutcome mapped = map_phase(tasks, config.mapreduce.threads);
  v.failed_tasks = mapped.failed;
  for (const auto& rec : mapped.records) store_intermediate(store, rec);
  v.store_size = store.size();

  auto entries = store.mutable_entries();
  const auto plant = static_cast<std::size_t>(
      std::llround(config.mapreduce.corrupt_fraction * static_cast<double>(entries.size())));
  if (plant > 0) {
    // Partial Fisher-Yates over the canonical entry order.
    RngStream rng(config.seed, derive_stream_id(StreamPurpose::kScenario, 1));
    for (std::size_t i = 0; i < plant; ++i) {
      const auto j = i + rng.uniform_index(entries.size() - i);
      std::swap(entries[i], entries[j]);
      entries[i]->energy = corrupt_energy(entries[i]->energy, rng.uniform());
      v.planted.push_back(entries[i]->digest);
    }
    std::sort(v.planted.begin(), v.planted.end());
  }

  v.mismatches = verify_intermediates(store);
  for (const auto& m : v.mismatches) {
    if (std::binary_search(v.planted.begin(), v.planted.end(), m.digest)) ++v.true_positives;
  }
  try {
    v.best = reduce_best(store);
  } catch (const RuntimeFailure&) {
    v.best.reset();
  }
  return v;
}

std::string verify_json(const VerifyReport& v) {
  ordered j;
  j["tasks"] = v.tasks;
  j["failed_tasks"] = v.failed_tasks;
  j["store_size"] = v.store_size;
  j["planted"] = v.planted.size();
  j["mismatches"] = v.mismatches.size();
  j["true_positives"] = v.true_positives;
  ordered list = ordered::array();
  for (const auto& m : v.mismatches) {
    std::ostringstream hex;
    hex << std::hex;
    hex.width(16);
    hex.fill('0');
    hex << m.digest;
    list.push_back({{"digest", hex.str()},
                    {"task_id", m.task_id},
                    {"reported", m.reported},
                    {"recomputed", number_or_null(m.recomputed)},
                    {"kind", m.kind == MismatchKind::kEnergy ? "energy" : "infeasible"}});
  }
  j["mismatch_list"] = list;
  if (v.best) {
    j["best"] = {{"energy", v.best->energy},
                 {"task_id", v.best->task_id},
                 {"solution", solution_json(v.best->solution)}};
  } else {
    j["best"] = nullptr;
  }
  return j.dump(2) + "\n";
}

OracleReport run_oracle(const ExperimentConfig& config) {
  const ProblemPtr problem = make_problem(config.problem);
  return {to_string(problem->kind()), brute_force_optimum(*problem)};
}

std::string oracle_json(const OracleReport& r) {
  ordered j;
  j["problem"] = r.problem;
  j["energy"] = r.optimum.energy;
  j["solution"] = solution_json(r.optimum.solution);
  return j.dump(2) + "\n";
}

}  // namespace dsa
