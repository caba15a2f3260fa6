#include "dsa/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "dsa/errors.hpp"
#include "dsa/text.hpp"

namespace dsa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRecomputeTolerance = 1e-9;

bool better(double energy, int src, const std::optional<BestRecord>& than) {
  if (!than) return true;
  return energy < than->energy || (energy == than->energy && src < than->src);
}

// Verified minimum of a reciprocator's store, or +inf.
double best_verified(const Problem& problem, const std::vector<ReplicaEntry>& store,
                     const ReplicaEntry** which = nullptr) {
  double best = kInf;
  for (const auto& entry : store) {
    double truth;
    try {
      truth = problem.energy(entry.solution);
    } catch (const ValidationError&) {
      continue;
    }
    if (std::abs(truth - entry.claimed_energy) > kRecomputeTolerance) continue;
    if (truth < best) {
      best = truth;
      if (which) *which = &entry;
    }
  }
  return best;
}

}  // namespace

const char* to_string(Role role) {
  switch (role) {
    case Role::kSearcher: return "SEARCHER";
    case Role::kReciprocator: return "RECIPROCATOR";
    case Role::kStandby: return "STANDBY";
    case Role::kDead: return "DEAD";
    case Role::kQuarantined: return "QUARANTINED";
  }
  return "?";
}

const char* to_string(LogEvent event) {
  switch (event) {
    case LogEvent::kSend: return "SEND";
    case LogEvent::kDeliver: return "DELIVER";
    case LogEvent::kDrop: return "DROP";
    case LogEvent::kCorrupt: return "CORRUPT";
    case LogEvent::kDiscard: return "DISCARD";
    case LogEvent::kIgnore: return "IGNORE";
    case LogEvent::kCancel: return "CANCEL";
    case LogEvent::kCrash: return "CRASH";
    case LogEvent::kDetectDead: return "DETECT_DEAD";
    case LogEvent::kActivate: return "ACTIVATE";
    case LogEvent::kPromote: return "PROMOTE";
    case LogEvent::kPromoteSkip: return "PROMOTE_SKIP";
    case LogEvent::kNoStandby: return "NO_STANDBY";
    case LogEvent::kFlag: return "FLAG";
    case LogEvent::kSanction: return "SANCTION";
    case LogEvent::kSanctionNoop: return "SANCTION_NOOP";
    case LogEvent::kEccentricOn: return "ECCENTRIC_ON";
    case LogEvent::kEccentricOff: return "ECCENTRIC_OFF";
    case LogEvent::kGlobalBest: return "GLOBAL_BEST";
    case LogEvent::kDone: return "DONE";
  }
  return "?";
}

std::string format_log_record(const LogRecord& r) {
  std::string line = std::to_string(r.tick);
  line += ' ';
  line += to_string(r.event);
  line += ' ';
  line += r.kind ? to_string(*r.kind) : "-";
  line += ' ' + std::to_string(r.src) + ' ' + std::to_string(r.dst) + ' ' +
          std::to_string(r.seq) + ' ' + format_double(r.energy) + ' ' +
          format_double(r.temperature) + ' ' + format_double(r.aux) + ' ' +
          (r.note.empty() ? "-" : r.note);
  return line;
}

void write_event_log(std::ostream& out, const std::vector<LogRecord>& log) {
  for (const auto& r : log) out << format_log_record(r) << '\n';
}

std::uint64_t Counters::total_sent() const {
  std::uint64_t total = 0;
  for (auto n : sent) total += n;
  return total;
}

bool EventOrder::operator()(const Event& a, const Event& b) const {
  if (a.time != b.time) return a.time < b.time;
  if (a.rank != b.rank) return a.rank < b.rank;
  if (a.src != b.src) return a.src < b.src;
  return a.seq < b.seq;
}

void validate(const ClusterConfig& c) {
  if (c.n_searchers < 1) throw ValidationError("cluster needs at least one searcher");
  if (c.n_standby < 0) throw ValidationError("standby count must be >= 0");
  if (c.heartbeat_period < 1) throw ParameterError("heartbeat_period must be >= 1");
  if (c.missed_heartbeats < 1) throw ParameterError("missed_heartbeats must be >= 1");
  if (!(c.adoption_beta >= 0 && c.adoption_beta <= 1)) {
    throw ParameterError("adoption_beta must lie in [0, 1]");
  }
  validate(c.fabric);
  validate(c.params);
}

double SimState::schedule_temperature() const {
  const auto& p = config.params;
  const std::uint64_t steps_done = now > 0 ? now - 1 : 0;
  const std::uint64_t plateaus = steps_done / p.steps_per_temperature;
  double t = p.t0;
  for (std::uint64_t i = 0; i < plateaus && t > p.t_low; ++i) t = cool(p, t);
  return t;
}

std::uint32_t SimState::live_node_count() const {
  std::uint32_t n = 0;
  for (const auto& node : nodes) n += is_alive(node.role) ? 1 : 0;
  return n;
}

std::uint32_t SimState::live_searcher_count() const {
  std::uint32_t n = 0;
  for (const auto& node : nodes) n += node.role == Role::kSearcher ? 1 : 0;
  return n;
}

namespace detail {

void log_event(SimState& sim, LogRecord record) {
  record.tick = sim.now;
  sim.log.push_back(std::move(record));
}

void record_fault(SimState& sim, FaultKind kind, int node, std::uint64_t seq) {
  sim.faults.push_back({sim.now, kind, node, seq});
  ++sim.counters.faults_applied;
}

ChainState fresh_chain(SimState& sim, NodeState& node, double temperature,
                       const std::optional<BestRecord>& seed_from) {
  const auto& p = sim.config.params;
  ChainState chain;
  if (seed_from) {
    chain.current_solution = seed_from->solution;
  } else {
    chain.current_solution = sim.problem->random_solution(node.chain_rng);
  }
  chain.current_energy = sim.problem->energy(chain.current_solution);
  chain.best_solution = chain.current_solution;
  chain.best_energy = chain.current_energy;
  chain.temperature = std::clamp(temperature, p.t_low, p.t0);
  node.announced = false;
  return chain;
}

}  // namespace detail

using detail::log_event;
using detail::record_fault;

SimState build_cluster(const ClusterConfig& config, ProblemPtr problem,
                       std::uint64_t master_seed, FaultScenario scenario,
                       ToleranceConfig tolerance) {
  validate(config);
  validate(tolerance);
  if (!problem) throw ValidationError("cluster needs a problem");

  SimState sim;
  sim.config = config;
  sim.problem = std::move(problem);
  sim.master_seed = master_seed;
  sim.tolerance = tolerance;

  const int total = config.n_searchers + config.n_standby;
  sim.scenario = materialize(std::move(scenario), total, master_seed);
  validate(sim.scenario, total, std::numeric_limits<std::uint64_t>::max());
  sim.fabric = apply_overrides(config.fabric, sim.scenario);
  validate(sim.fabric);

  sim.nodes.reserve(total);
  for (int i = 0; i < total; ++i) {
    NodeState node(i, RngStream(master_seed, derive_stream_id(StreamPurpose::kChain, i)),
                   RngStream(master_seed, derive_stream_id(StreamPurpose::kProtocol, i)));
    if (i < config.n_searchers) {
      node.role = Role::kSearcher;
      node.chain = start_chain(*sim.problem, config.params, node.chain_rng);
      node.initial_energy = node.chain->current_energy;
    } else {
      node.role = Role::kStandby;
    }
    sim.nodes.push_back(std::move(node));
  }

  auto& coord = sim.coordinator;
  coord.last_heartbeat.assign(total, 0);
  coord.declared_dead.assign(total, false);
  coord.reciprocator_holding.assign(total, std::nullopt);
  coord.guard = make_guard(tolerance, config.params);

  for (const auto& crash : sim.scenario.crashes) {
    sim.queue.insert(Event{crash.tick, Event::kFault, crash.node, sim.next_seq++,
                           Event::Crash{crash.node}});
  }
  for (const auto& ecc : sim.scenario.eccentric) {
    sim.nodes[ecc.node].eccentric = ecc;
    sim.queue.insert(Event{ecc.start_tick, Event::kFault, ecc.node, sim.next_seq++,
                           Event::EccentricToggle{ecc.node, true}});
    if (ecc.end_tick) {
      sim.queue.insert(Event{*ecc.end_tick, Event::kFault, ecc.node, sim.next_seq++,
                             Event::EccentricToggle{ecc.node, false}});
    }
  }
  return sim;
}

namespace {

std::vector<int> broadcast_targets(const SimState& sim, int src) {
  std::vector<int> targets;
  if (src != kCoordinator) targets.push_back(kCoordinator);
  for (const auto& node : sim.nodes) {
    if (node.id == src) continue;
    if (node.role == Role::kSearcher || node.role == Role::kReciprocator) {
      targets.push_back(node.id);
    }
  }
  return targets;
}

}  // namespace

void send(SimState& sim, Message msg) {
  msg.send_time = sim.now;
  std::vector<int> targets;
  if (msg.dst == kBroadcast) {
    targets = broadcast_targets(sim, msg.src);
  } else {
    targets.push_back(msg.dst);
  }
  std::uint64_t& index = msg.src == kCoordinator ? sim.coordinator.send_index
                                                 : sim.node(msg.src).send_index;
  const std::uint64_t logical = index++;

  for (int dst : targets) {
    Message copy = msg;
    copy.dst = dst;
    copy.seq = sim.next_seq++;
    RngStream rng = fabric_stream(sim.master_seed, msg.src, logical, dst);

    const auto k = static_cast<std::size_t>(copy.kind);
    ++sim.counters.sent[k];
    if (msg.src != kCoordinator) ++sim.node(msg.src).messages_sent;
    log_event(sim, {0, LogEvent::kSend, copy.kind, copy.src, dst, copy.seq, copy.energy,
                    copy.temperature, 0, {}});

    if (is_data_plane(copy.kind)) {
      if (maybe_drop(sim.fabric, copy, rng)) {
        ++sim.counters.dropped;
        log_event(sim, {0, LogEvent::kDrop, copy.kind, copy.src, dst, copy.seq,
                        copy.energy, copy.temperature, 0, {}});
        record_fault(sim, FaultKind::kDrop, copy.src, copy.seq);
        continue;
      }
      const double honest = copy.energy;
      copy = maybe_corrupt(sim.fabric, std::move(copy), rng);
      if (copy.corrupted) {
        ++sim.counters.corrupted;
        log_event(sim, {0, LogEvent::kCorrupt, copy.kind, copy.src, dst, copy.seq,
                        copy.energy, copy.temperature, honest, {}});
        record_fault(sim, FaultKind::kCorrupt, copy.src, copy.seq);
      }
    } else {
      rng.next_u64();
      rng.next_u64();
      rng.next_u64();
    }
    const std::uint64_t delay = sim.fabric.base_delay + rng.uniform_index(sim.fabric.jitter + 1);
    copy.delivery_time = sim.now + delay;
    const std::uint64_t t = copy.delivery_time;
    const int src = copy.src;
    const std::uint64_t seq = copy.seq;
    sim.queue.insert(Event{t, Event::kDelivery, src, seq, Event::Delivery{std::move(copy)}});
  }
}

namespace {

void emit_best_found(SimState& sim, NodeState& node, const Report& report) {
  Message m;
  m.kind = MessageKind::kBestFound;
  m.src = node.id;
  m.dst = sim.config.broadcast ? kBroadcast : kCoordinator;
  m.solution = report.solution;
  m.energy = report.energy;
  m.temperature = report.temperature;
  send(sim, std::move(m));
}

void send_replica(SimState& sim, int src, int dst, const Solution& solution,
                  double energy, double temperature) {
  Message m;
  m.kind = MessageKind::kReplica;
  m.src = src;
  m.dst = dst;
  m.solution = solution;
  m.energy = energy;
  m.temperature = temperature;
  send(sim, std::move(m));
}

std::vector<int> live_reciprocators(const SimState& sim) {
  std::vector<int> ids;
  for (const auto& n : sim.nodes) {
    if (n.role == Role::kReciprocator) ids.push_back(n.id);
  }
  return ids;
}

void heartbeat(SimState& sim, NodeState& node) {
  Message m;
  m.kind = MessageKind::kHeartbeat;
  m.src = node.id;
  m.dst = kCoordinator;
  if (node.role == Role::kReciprocator) {
    m.energy = best_verified(*sim.problem, node.replica_store);
  } else if (node.chain) {
    m.energy = node.chain->best_energy;
    m.temperature = node.chain->temperature;
  } else {
    m.energy = kInf;
  }
  node.last_heartbeat_sent = sim.now;
  send(sim, std::move(m));
}

double rising_delta(const NodeState& node) {
  if (node.eccentric && node.eccentric->delta) return *node.eccentric->delta;
  const double scale = std::abs(node.initial_energy);
  return scale > 0 ? 0.1 * scale : 0.1;
}

}  // namespace

void node_tick(SimState& sim, int node_id) {
  NodeState& node = sim.node(node_id);
  if (!is_alive(node.role)) return;
  const auto& params = sim.config.params;
  const std::uint64_t period = sim.config.heartbeat_period;

  if (node.role == Role::kSearcher && node.chain && !chain_finished(*node.chain, params)) {
    const bool eccentric = node.eccentric_active && node.eccentric;
    const bool frozen =
        eccentric && node.eccentric->kind == EccentricKind::kStuckTemperature;
    const double prev_best = node.chain->best_energy;
    node.chain = anneal_step(std::move(*node.chain), *sim.problem, params, node.chain_rng,
                             frozen ? Cooling::kFrozen : Cooling::kEnabled);
    ++node.steps;
    ChainState& chain = *node.chain;
    if (sim.config.record_trajectories) node.trajectory.push_back(chain.best_energy);

    const bool improved = chain.best_energy < prev_best;
    // A chain that never improves on its start still reports it once.
    const bool announce = improved || !node.announced;
    const bool beats_known =
        !node.known_global_best || chain.best_energy < node.known_global_best->energy;

    const bool periodic_liar =
        eccentric && node.eccentric->kind != EccentricKind::kUnderreport;
    if (periodic_liar) {
      if (sim.now % period == 0) {
        const Report r = eccentric_report(*node.eccentric, chain, node.eccentric_reports++,
                                          node.anchor, rising_delta(node));
        emit_best_found(sim, node, r);
      }
    } else if (announce && beats_known) {
      node.announced = true;
      node.known_global_best = BestRecord{chain.best_solution, chain.best_energy, node.id, sim.now};
      Report r{chain.best_solution, chain.best_energy, chain.temperature};
      if (eccentric) {
        r = eccentric_report(*node.eccentric, chain, node.eccentric_reports++,
                             node.anchor, rising_delta(node));
      }
      emit_best_found(sim, node, r);
    }

    if (improved && sim.tolerance.hybrid_replication && sim.coordinator.replication_started &&
        replication_active(chain.temperature, params, sim.tolerance.theta)) {
      for (int r : live_reciprocators(sim)) {
        send_replica(sim, node.id, r, chain.best_solution, chain.best_energy, chain.temperature);
      }
    }
  }

  if (sim.now % period == 0) heartbeat(sim, node);
}

namespace {

void coordinator_accept(SimState& sim, const Message& msg, double truth) {
  auto& coord = sim.coordinator;
  if (!better(truth, msg.src, coord.global_best)) return;
  coord.global_best = BestRecord{msg.solution, truth, msg.src, sim.now};
  sim.improvements.emplace_back(sim.now, truth);
  log_event(sim, {0, LogEvent::kGlobalBest, msg.kind, msg.src, kCoordinator, msg.seq, truth,
                  msg.temperature, 0, {}});
  if (sim.problem->kind() == ProblemKind::kSkewed1d && !sim.first_global_basin_tick &&
      in_global_basin(std::get<double>(msg.solution))) {
    sim.first_global_basin_tick = sim.now;
  }
  if (coord.replication_started) {
    const double t = sim.schedule_temperature();
    for (int r : live_reciprocators(sim)) {
      send_replica(sim, kCoordinator, r, coord.global_best->solution, truth, t);
    }
  }
}

void coordinator_receive(SimState& sim, const Message& msg) {
  auto& coord = sim.coordinator;
  ++sim.counters.coordinator_events;
  if (msg.src >= 0 && sim.node(msg.src).role == Role::kQuarantined) {
    log_event(sim, {0, LogEvent::kIgnore, msg.kind, msg.src, msg.dst, msg.seq, msg.energy,
                    msg.temperature, 0, "quarantined-src"});
    return;
  }

  switch (msg.kind) {
    case MessageKind::kBestFound: {
      bool mismatch = false;
      double truth = kInf;
      try {
        truth = sim.problem->energy(msg.solution);
        mismatch = std::abs(truth - msg.energy) > kRecomputeTolerance;
      } catch (const ValidationError&) {
        mismatch = true;
      }
      log_event(sim, {0, LogEvent::kDeliver, msg.kind, msg.src, msg.dst, msg.seq, msg.energy,
                      msg.temperature, truth, {}});
      ++sim.counters.delivered[static_cast<std::size_t>(msg.kind)];

      bool flagged = false;
      if (sim.tolerance.gradient_guard && msg.src >= 0) {
        const auto res = guard_observe(coord.guard, msg.src,
                                       {msg.send_time, msg.energy, msg.temperature}, mismatch);
        if (res.verdict == Verdict::kFlagged) {
          flagged = true;
          ++sim.counters.flags;
          log_event(sim, {0, LogEvent::kFlag, msg.kind, msg.src, kCoordinator, msg.seq,
                          msg.energy, msg.temperature, static_cast<double>(res.rule),
                          to_string(res.rule)});
          apply_sanction(sim, msg.src, choose_sanction(sim.tolerance.sanction, res.rule));
        }
      }
      if (mismatch) {
        ++sim.counters.corruptions_detected;
        log_event(sim, {0, LogEvent::kDiscard, msg.kind, msg.src, kCoordinator, msg.seq,
                        msg.energy, msg.temperature, truth, {}});
        return;
      }
      if (!flagged) coordinator_accept(sim, msg, truth);
      return;
    }
    case MessageKind::kHeartbeat: {
      log_event(sim, {0, LogEvent::kDeliver, msg.kind, msg.src, msg.dst, msg.seq, msg.energy,
                      msg.temperature, 0, {}});
      ++sim.counters.delivered[static_cast<std::size_t>(msg.kind)];
      auto& last = coord.last_heartbeat.at(msg.src);
      last = std::max(last, msg.send_time);
      if (sim.node(msg.src).role == Role::kReciprocator) {
        coord.reciprocator_holding.at(msg.src) = msg.energy;
      }
      return;
    }
    default:
      log_event(sim, {0, LogEvent::kIgnore, msg.kind, msg.src, msg.dst, msg.seq, msg.energy,
                      msg.temperature, 0, "unexpected-at-coordinator"});
      return;
  }
}

void maybe_adopt(SimState& sim, NodeState& node, const Message& msg) {
  if (!node.chain || msg.energy >= node.chain->current_energy) return;
  const auto& p = sim.config.params;
  const double gate =
      std::min(1.0, std::sqrt(p.t_low / node.chain->temperature)) * sim.config.adoption_beta;
  if (!(node.protocol_rng.uniform() < gate)) return;
  double truth;
  try {
    truth = sim.problem->energy(msg.solution);
  } catch (const ValidationError&) {
    return;
  }
  ChainState& chain = *node.chain;
  chain.current_solution = msg.solution;
  chain.current_energy = truth;
  if (truth < chain.best_energy) {
    chain.best_solution = msg.solution;
    chain.best_energy = truth;
  }
}

}  // namespace

void deliver(SimState& sim, const Message& msg) {
  if (msg.dst == kCoordinator) {
    coordinator_receive(sim, msg);
    return;
  }
  NodeState& node = sim.node(msg.dst);
  if (!is_alive(node.role)) {
    log_event(sim, {0, LogEvent::kIgnore, msg.kind, msg.src, msg.dst, msg.seq, msg.energy,
                    msg.temperature, 0, "dead-dst"});
    return;
  }
  double truth = 0;
  if (is_data_plane(msg.kind)) {
    try {
      truth = sim.problem->energy(msg.solution);
    } catch (const ValidationError&) {
      truth = std::numeric_limits<double>::quiet_NaN();
    }
  }
  log_event(sim, {0, LogEvent::kDeliver, msg.kind, msg.src, msg.dst, msg.seq, msg.energy,
                  msg.temperature, truth, {}});
  ++sim.counters.delivered[static_cast<std::size_t>(msg.kind)];

  switch (msg.kind) {
    case MessageKind::kBestFound:
      if (node.role == Role::kReciprocator) {
        node.replica_store.push_back({msg.solution, msg.energy, msg.src, sim.now});
      } else if (node.role == Role::kSearcher) {
        if (better(msg.energy, msg.src, node.known_global_best)) {
          node.known_global_best = BestRecord{msg.solution, msg.energy, msg.src, sim.now};
        }
        maybe_adopt(sim, node, msg);
      }
      return;
    case MessageKind::kReplica:
      if (node.role == Role::kReciprocator) {
        node.replica_store.push_back({msg.solution, msg.energy, msg.src, sim.now});
      }
      return;
    case MessageKind::kTempReset:
      if (node.chain) {
        node.chain->temperature = msg.temperature;
        node.chain->steps_at_floor = 0;
      }
      return;
    case MessageKind::kQuarantine:
      if (node.known_global_best && node.known_global_best->src == msg.subject) {
        if (std::isfinite(msg.energy)) {
          node.known_global_best = BestRecord{msg.solution, msg.energy, kCoordinator, sim.now};
        } else {
          node.known_global_best.reset();
        }
      }
      return;
    case MessageKind::kHeartbeat:
      return;
  }
}

namespace {

void coordinator_step(SimState& sim) {
  auto& coord = sim.coordinator;
  const auto& cfg = sim.config;
  const std::uint64_t timeout = cfg.missed_heartbeats * cfg.heartbeat_period + sim.max_delay();

  for (auto& node : sim.nodes) {
    if (coord.declared_dead[node.id] || node.role == Role::kQuarantined) continue;
    if (sim.now < coord.last_heartbeat[node.id] + timeout) continue;
    coord.declared_dead[node.id] = true;
    ++sim.counters.deaths_detected;
    log_event(sim, {0, LogEvent::kDetectDead, std::nullopt, kCoordinator, node.id, 0, 0, 0,
                    static_cast<double>(coord.last_heartbeat[node.id]), {}});
    if (sim.tolerance.hot_standby && node.role == Role::kDead &&
        node.role_before_death == Role::kSearcher) {
      hot_standby_replace(sim, node.id);
    }
  }

  if (sim.tolerance.hybrid_replication && !coord.replication_started &&
      replication_active(sim.schedule_temperature(), cfg.params, sim.tolerance.theta)) {
    promote_reciprocators(sim, sim.tolerance.rho);
    coord.replication_started = true;
    if (coord.global_best) {
      const double t = sim.schedule_temperature();
      for (int r : live_reciprocators(sim)) {
        send_replica(sim, kCoordinator, r, coord.global_best->solution, coord.global_best->energy, t);
      }
    }
  }

  // Re-send the record to reciprocators that have not confirmed it.
  if (coord.replication_started && coord.global_best && sim.now % cfg.heartbeat_period == 0) {
    const double t = sim.schedule_temperature();
    for (int r : live_reciprocators(sim)) {
      const auto& holding = coord.reciprocator_holding[r];
      if (holding && *holding <= coord.global_best->energy) continue;
      send_replica(sim, kCoordinator, r, coord.global_best->solution, coord.global_best->energy, t);
    }
  }
}

void toggle_eccentric(SimState& sim, int id, bool on) {
  NodeState& node = sim.node(id);
  if (!is_alive(node.role) || !node.eccentric) return;
  node.eccentric_active = on;
  if (on) {
    node.eccentric_reports = 0;
    if (node.chain) {
      node.anchor = {node.chain->best_solution, node.chain->best_energy, node.chain->temperature};
    }
  }
  log_event(sim, {0, on ? LogEvent::kEccentricOn : LogEvent::kEccentricOff, std::nullopt, id,
                  id, 0, 0, 0, static_cast<double>(node.eccentric->kind),
                  to_string(node.eccentric->kind)});
  record_fault(sim, on ? FaultKind::kEccentricOn : FaultKind::kEccentricOff, id, 0);
}

bool pending_deliveries(const SimState& sim) {
  return std::any_of(sim.queue.begin(), sim.queue.end(), [](const Event& e) {
    return std::holds_alternative<Event::Delivery>(e.body);
  });
}

bool replication_settled(const SimState& sim) {
  const auto& coord = sim.coordinator;
  if (!coord.replication_started || !coord.global_best) return true;
  bool any_live = false;
  for (const auto& n : sim.nodes) {
    if (n.role != Role::kReciprocator) continue;
    any_live = true;
    const auto& h = coord.reciprocator_holding[n.id];
    if (h && *h <= coord.global_best->energy) return true;
  }
  return !any_live;
}

bool work_remaining(const SimState& sim) {
  for (const auto& n : sim.nodes) {
    if (n.role == Role::kSearcher && n.chain && !chain_finished(*n.chain, sim.config.params)) {
      return true;
    }
  }
  return pending_deliveries(sim) || !replication_settled(sim);
}

void schedule_tick(SimState& sim, std::uint64_t t) {
  sim.queue.insert(Event{t, Event::kCoordinatorStep, kCoordinator, sim.next_seq++,
                         Event::CoordinatorStep{}});
  for (const auto& n : sim.nodes) {
    if (!is_alive(n.role)) continue;
    sim.queue.insert(Event{t, Event::kNodeTick, n.id, sim.next_seq++, Event::NodeTick{n.id}});
  }
}

}  // namespace

bool step_simulation(SimState& sim) {
  if (sim.done) return false;
  if (sim.now == 0 && sim.rows.empty()) {
    schedule_tick(sim, 1);
  }
  if (sim.queue.empty()) {
    sim.done = true;
    return false;
  }
  sim.now = sim.queue.begin()->time;

  while (!sim.queue.empty() && sim.queue.begin()->time == sim.now) {
    Event ev = std::move(sim.queue.extract(sim.queue.begin()).value());
    std::visit(
        [&](auto& body) {
          using T = std::decay_t<decltype(body)>;
          if constexpr (std::is_same_v<T, Event::Crash>) {
            if (sim.node(body.node).role != Role::kDead) apply_crash(sim, body.node, sim.now);
          } else if constexpr (std::is_same_v<T, Event::EccentricToggle>) {
            toggle_eccentric(sim, body.node, body.on);
          } else if constexpr (std::is_same_v<T, Event::Delivery>) {
            deliver(sim, body.msg);
          } else if constexpr (std::is_same_v<T, Event::CoordinatorStep>) {
            coordinator_step(sim);
          } else {
            node_tick(sim, body.node);
          }
        },
        ev.body);
  }

  const auto& g = sim.coordinator.global_best;
  sim.rows.push_back({sim.now, g ? g->energy : kInf, sim.counters.total_sent(),
                      sim.counters.dropped, sim.live_node_count()});

  if (work_remaining(sim)) {
    const bool tick_queued = std::any_of(sim.queue.begin(), sim.queue.end(), [&](const Event& e) {
      return e.time == sim.now + 1 && std::holds_alternative<Event::CoordinatorStep>(e.body);
    });
    if (!tick_queued) schedule_tick(sim, sim.now + 1);
  } else {
    // Drop future fault events; nothing is left for them to act on.
    sim.queue.clear();
    log_event(sim, {0, LogEvent::kDone, std::nullopt, kCoordinator, kCoordinator, 0,
                    g ? g->energy : kInf, 0, 0, {}});
    sim.done = true;
  }
  return !sim.done;
}

ExperimentTrace run_until_done(SimState& sim, std::uint64_t budget_ticks) {
  if (budget_ticks < 1) throw ParameterError("budget_ticks must be >= 1");
  while (!sim.done && (sim.rows.empty() || sim.now < budget_ticks)) {
    if (!step_simulation(sim)) break;
  }

  ExperimentTrace trace;
  trace.completed = sim.done;
  trace.ticks = sim.now;
  trace.rows = sim.rows;
  trace.log = sim.log;
  trace.faults = sim.faults;
  trace.counters = sim.counters;
  trace.improvements = sim.improvements;
  trace.first_global_basin_tick = sim.first_global_basin_tick;
  trace.coordinator_best = sim.coordinator.global_best;
  trace.final_best = sim.coordinator.global_best;

  for (const auto& n : sim.nodes) {
    NodeSummary s{n.id, n.role, n.steps, n.messages_sent, std::nullopt, std::nullopt};
    if (n.chain) {
      s.best_energy = n.chain->best_energy;
      s.best_solution = n.chain->best_solution;
    }
    trace.total_steps += n.steps;
    trace.nodes.push_back(s);
    trace.trajectories.push_back(n.trajectory);

    if (n.role != Role::kReciprocator) continue;
    const ReplicaEntry* entry = nullptr;
    const double e = best_verified(*sim.problem, n.replica_store, &entry);
    if (entry && better(e, entry->src, trace.final_best)) {
      trace.final_best = BestRecord{entry->solution, e, entry->src, entry->tick};
    }
  }
  return trace;
}

}  // namespace dsa
