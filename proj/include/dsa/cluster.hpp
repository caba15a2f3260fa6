#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "dsa/anneal.hpp"
#include "dsa/faults.hpp"
#include "dsa/message.hpp"
#include "dsa/problem.hpp"
#include "dsa/tolerance.hpp"

namespace dsa {

enum class Role { kSearcher, kReciprocator, kStandby, kDead, kQuarantined };

const char* to_string(Role role);

inline bool is_alive(Role r) { return r != Role::kDead && r != Role::kQuarantined; }

struct ClusterConfig {
  int n_searchers = 1;
  int n_standby = 0;
  FabricConfig fabric;
  AnnealParams params;
  // When false, BEST_FOUND goes to the coordinator only.
  bool broadcast = true;
  // Adoption gate multiplier.
  double adoption_beta = 0.5;
  std::uint64_t heartbeat_period = 10;
  std::uint32_t missed_heartbeats = 3;
  // Keep every searcher's per-step best energy (replay tests).
  bool record_trajectories = false;
};

void validate(const ClusterConfig& config);

struct BestRecord {
  Solution solution;
  double energy = 0;
  int src = kCoordinator;
  std::uint64_t tick = 0;
};

struct ReplicaEntry {
  Solution solution;
  double claimed_energy = 0;
  int src = 0;
  std::uint64_t tick = 0;
};

struct NodeState {
  int id = 0;
  Role role = Role::kSearcher;
  Role role_before_death = Role::kSearcher;
  std::optional<ChainState> chain;  // present iff SEARCHER
  std::optional<BestRecord> known_global_best;
  std::vector<ReplicaEntry> replica_store;
  std::uint64_t last_heartbeat_sent = 0;

  RngStream chain_rng;
  RngStream protocol_rng;
  std::uint64_t send_index = 0;  // logical sends, drives fabric streams
  std::uint64_t steps = 0;
  std::uint64_t messages_sent = 0;
  double initial_energy = 0;
  bool announced = false;  // has reported its chain's best at least once

  // Eccentric behavior armed for this node, if any.
  std::optional<EccentricSpec> eccentric;
  bool eccentric_active = false;
  std::uint64_t eccentric_reports = 0;
  Report anchor;

  std::vector<double> trajectory;

  NodeState(int id_, RngStream chain, RngStream protocol)
      : id(id_), chain_rng(chain), protocol_rng(protocol) {}
};

// Event-log entry. One line per record when exported.
enum class LogEvent {
  kSend,
  kDeliver,
  kDrop,
  kCorrupt,
  kDiscard,   // coordinator recompute mismatch
  kIgnore,    // arrived at or from a dead/quarantined node
  kCancel,    // in flight from a node that crashed before sending it
  kCrash,
  kDetectDead,
  kActivate,
  kPromote,
  kPromoteSkip,
  kNoStandby,
  kFlag,
  kSanction,
  kSanctionNoop,
  kEccentricOn,
  kEccentricOff,
  kGlobalBest,
  kDone,
};

const char* to_string(LogEvent event);

struct LogRecord {
  std::uint64_t tick = 0;
  LogEvent event = LogEvent::kSend;
  std::optional<MessageKind> kind;
  int src = kCoordinator;
  int dst = kCoordinator;
  std::uint64_t seq = 0;
  double energy = 0;       // claimed energy, when applicable
  double temperature = 0;
  double aux = 0;          // true energy, rule id, sanction id...
  std::string note;
};

std::string format_log_record(const LogRecord& r);

struct TraceRow {
  std::uint64_t tick = 0;
  double global_best_energy = 0;  // +inf before the first record
  std::uint64_t messages_sent = 0;
  std::uint64_t messages_dropped = 0;
  std::uint32_t live_nodes = 0;

  bool operator==(const TraceRow&) const = default;
};

struct Counters {
  std::array<std::uint64_t, kMessageKindCount> sent{};
  std::array<std::uint64_t, kMessageKindCount> delivered{};
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

  std::uint64_t total_sent() const;
};

// Event-queue entry. Ties at one tick break by (rank, src, seq), a total
// order, so replay is exact.
struct Event {
  enum Rank : int { kFault = 0, kDelivery = 1, kCoordinatorStep = 2, kNodeTick = 3 };
  struct Crash { int node; };
  struct EccentricToggle { int node; bool on; };
  struct Delivery { Message msg; };
  struct CoordinatorStep {};
  struct NodeTick { int node; };

  std::uint64_t time = 0;
  int rank = 0;
  int src = 0;
  std::uint64_t seq = 0;
  std::variant<Crash, EccentricToggle, Delivery, CoordinatorStep, NodeTick> body;
};

struct EventOrder {
  bool operator()(const Event& a, const Event& b) const;
};

using EventQueue = std::set<Event, EventOrder>;

struct CoordinatorState {
  std::optional<BestRecord> global_best;
  std::vector<std::uint64_t> last_heartbeat;  // send tick of newest heartbeat
  std::vector<bool> declared_dead;
  std::vector<std::optional<double>> reciprocator_holding;
  bool replication_started = false;
  std::uint64_t send_index = 0;
  GuardState guard;
};

struct SimState {
  ClusterConfig config;
  ProblemPtr problem;
  std::uint64_t master_seed = 0;
  FaultScenario scenario;
  ToleranceConfig tolerance;
  FabricConfig fabric;  // config.fabric with scenario overrides

  std::uint64_t now = 0;
  std::uint64_t next_seq = 0;
  EventQueue queue;
  std::vector<NodeState> nodes;
  CoordinatorState coordinator;
  bool done = false;

  std::vector<LogRecord> log;
  FaultTrace faults;
  Counters counters;
  std::vector<TraceRow> rows;
  std::vector<std::pair<std::uint64_t, double>> improvements;
  std::optional<std::uint64_t> first_global_basin_tick;

  NodeState& node(int id) { return nodes.at(static_cast<std::size_t>(id)); }
  const NodeState& node(int id) const { return nodes.at(static_cast<std::size_t>(id)); }
  int node_count() const { return static_cast<int>(nodes.size()); }
  // Worst-case one-way delay, used by the liveness timeout.
  std::uint64_t max_delay() const { return fabric.base_delay + fabric.jitter; }
  // Temperature of a chain started at t0 on tick 1.
  double schedule_temperature() const;
  std::uint32_t live_node_count() const;
  std::uint32_t live_searcher_count() const;
};

// Nodes 0..n_searchers-1 are searchers, the next n_standby are standby.
// Node i anneals on RngStream(master_seed, i).
SimState build_cluster(const ClusterConfig& config, ProblemPtr problem,
                       std::uint64_t master_seed, FaultScenario scenario = {},
                       ToleranceConfig tolerance = {});

// One anneal step for a live searcher plus whatever it emits. Exposed for
// tests; the event loop calls it from NodeTick events.
void node_tick(SimState& sim, int node_id);

// Applies one delivered message to its destination.
void deliver(SimState& sim, const Message& msg);

// Queues one copy per destination (expanding kBroadcast) through the fabric.
void send(SimState& sim, Message msg);

// Processes every event of the next tick. Returns false once complete.
bool step_simulation(SimState& sim);

struct NodeSummary {
  int id = 0;
  Role role = Role::kSearcher;
  std::uint64_t steps = 0;
  std::uint64_t messages_sent = 0;
  std::optional<double> best_energy;
  std::optional<Solution> best_solution;
};

struct ExperimentTrace {
  std::vector<TraceRow> rows;
  std::vector<LogRecord> log;
  FaultTrace faults;
  Counters counters;
  std::vector<NodeSummary> nodes;
  std::vector<std::vector<double>> trajectories;
  std::vector<std::pair<std::uint64_t, double>> improvements;
  std::optional<BestRecord> final_best;  // coordinator record merged with reciprocators
  std::optional<BestRecord> coordinator_best;
  std::optional<std::uint64_t> first_global_basin_tick;
  std::uint64_t ticks = 0;
  bool completed = false;
  std::uint64_t total_steps = 0;
};

ExperimentTrace run_until_done(SimState& sim, std::uint64_t budget_ticks);

void write_event_log(std::ostream& out, const std::vector<LogRecord>& log);

// Internal helpers shared by the strategy modules.
namespace detail {
void log_event(SimState& sim, LogRecord record);
void record_fault(SimState& sim, FaultKind kind, int node, std::uint64_t seq);
ChainState fresh_chain(SimState& sim, NodeState& node, double temperature,
                       const std::optional<BestRecord>& seed_from);
}  // namespace detail

}  // namespace dsa
