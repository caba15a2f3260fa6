#include "dsa/tolerance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dsa/cluster.hpp"
#include "dsa/errors.hpp"

namespace dsa {

const char* to_string(Sanction s) {
  return s == Sanction::kQuarantine ? "QUARANTINE" : "TEMP_RESET";
}

const char* to_string(GuardRule rule) {
  switch (rule) {
    case GuardRule::kNone: return "none";
    case GuardRule::kRisingEnergy: return "rising-energy";
    case GuardRule::kRisingTemperature: return "rising-temperature";
    case GuardRule::kRecomputeMismatch: return "recompute-mismatch";
    case GuardRule::kFrozenTemperature: return "frozen-temperature";
  }
  return "?";
}

void validate(const ToleranceConfig& c) {
  if (!(c.theta > 0 && c.theta < 1)) throw ParameterError("theta must lie in (0, 1)");
  if (!(c.rho > 0 && c.rho < 1)) throw ParameterError("rho must lie in (0, 1)");
  if (c.guard_window < 1) throw ParameterError("guard window must be >= 1");
  if (!(c.eps >= 0) || !std::isfinite(c.eps)) throw ParameterError("eps must be >= 0");
}

double replication_threshold(const AnnealParams& params, double theta) {
  return params.t_low * std::pow(params.t0 / params.t_low, theta);
}

bool replication_active(double t, const AnnealParams& params, double theta) {
  if (!(t >= params.t_low && t <= params.t0)) {
    throw ParameterError("temperature outside [t_low, t0]");
  }
  return t <= replication_threshold(params, theta);
}

GuardState make_guard(const ToleranceConfig& config, const AnnealParams& params) {
  GuardState g;
  g.window = config.guard_window;
  g.eps = config.eps;
  g.t_low = params.t_low;
  g.steps_per_temperature = params.steps_per_temperature;
  return g;
}

GuardResult guard_observe(GuardState& guard, int node_id, const GuardReport& report,
                          bool recompute_mismatch) {
  GuardNode& node = guard.nodes[node_id];
  if (report.tick < node.ignore_before) return {};

  auto pos = std::upper_bound(node.window.begin(), node.window.end(), report.tick,
                              [](std::uint64_t t, const GuardReport& r) { return t < r.tick; });
  node.window.insert(pos, report);
  while (node.window.size() > guard.window) node.window.pop_front();

  GuardRule rule = GuardRule::kNone;
  if (recompute_mismatch) {
    rule = GuardRule::kRecomputeMismatch;
  } else {
    const auto& w = node.window;
    for (std::size_t j = 1; j < w.size() && rule == GuardRule::kNone; ++j) {
      for (std::size_t i = 0; i < j; ++i) {
        if (w[j].best_energy > w[i].best_energy + guard.eps) {
          rule = GuardRule::kRisingEnergy;
          break;
        }
        if (w[j].temperature > w[i].temperature) {
          rule = GuardRule::kRisingTemperature;
          break;
        }
      }
    }
    if (rule == GuardRule::kNone && w.size() == guard.window && w.size() >= 2) {
      const double t = w.front().temperature;
      const bool constant = std::all_of(w.begin(), w.end(),
                                        [&](const GuardReport& r) { return r.temperature == t; });
      if (constant && t > guard.t_low &&
          w.back().tick - w.front().tick >= guard.steps_per_temperature) {
        rule = GuardRule::kFrozenTemperature;
      }
    }
  }
  if (rule == GuardRule::kNone) return {};
  node.flagged = true;
  ++node.flag_count;
  return {Verdict::kFlagged, rule};
}

void guard_reset(GuardState& guard, int node_id, std::uint64_t effective_tick) {
  GuardNode& node = guard.nodes[node_id];
  node.window.clear();
  node.ignore_before = effective_tick;
}

Sanction choose_sanction(SanctionPolicy policy, GuardRule rule) {
  switch (policy) {
    case SanctionPolicy::kQuarantine: return Sanction::kQuarantine;
    case SanctionPolicy::kTempReset: return Sanction::kTempReset;
    case SanctionPolicy::kAuto: break;
  }
  return (rule == GuardRule::kFrozenTemperature || rule == GuardRule::kRisingTemperature)
             ? Sanction::kTempReset
             : Sanction::kQuarantine;
}

int promote_reciprocators(SimState& sim, double rho) {
  std::vector<NodeState*> searchers;
  for (auto& n : sim.nodes) {
    if (n.role == Role::kSearcher && n.chain) searchers.push_back(&n);
  }
  if (searchers.size() < 2) {
    detail::log_event(sim, {0, LogEvent::kPromoteSkip, std::nullopt, kCoordinator, kCoordinator,
                            0, 0, 0, static_cast<double>(searchers.size()), {}});
    return 0;
  }
  const auto n = searchers.size();
  const auto count = std::min<std::size_t>(
      static_cast<std::size_t>(std::ceil(rho * static_cast<double>(n))), n - 1);
  std::sort(searchers.begin(), searchers.end(), [](const NodeState* a, const NodeState* b) {
    if (a->chain->best_energy != b->chain->best_energy) {
      return a->chain->best_energy > b->chain->best_energy;
    }
    return a->id > b->id;
  });
  for (std::size_t i = 0; i < count; ++i) {
    NodeState& node = *searchers[i];
    const ChainState& chain = *node.chain;
    node.replica_store.push_back({chain.best_solution, chain.best_energy, node.id, sim.now});
    detail::log_event(sim, {0, LogEvent::kPromote, std::nullopt, kCoordinator, node.id, 0,
                            chain.best_energy, chain.temperature, 0, {}});
    node.role = Role::kReciprocator;
    node.chain.reset();
    ++sim.counters.promotions;
  }
  return static_cast<int>(count);
}

int hot_standby_replace(SimState& sim, int dead_node_id) {
  NodeState* standby = nullptr;
  for (auto& n : sim.nodes) {
    if (n.role == Role::kStandby) {
      standby = &n;
      break;
    }
  }
  if (!standby) {
    detail::log_event(sim, {0, LogEvent::kNoStandby, std::nullopt, kCoordinator, dead_node_id, 0,
                            0, 0, 0, {}});
    return -1;
  }
  const auto& params = sim.config.params;
  const double t = sim.schedule_temperature();
  const auto& record = sim.coordinator.global_best;
  const bool from_record = record && replication_active(t, params, sim.tolerance.theta);
  standby->chain = detail::fresh_chain(sim, *standby, t,
                                       from_record ? record : std::optional<BestRecord>{});
  standby->initial_energy = standby->chain->current_energy;
  standby->role = Role::kSearcher;
  standby->known_global_best = record;
  ++sim.counters.activations;
  detail::log_event(sim, {0, LogEvent::kActivate, std::nullopt, dead_node_id, standby->id, 0,
                          standby->chain->current_energy, standby->chain->temperature,
                          from_record ? 1.0 : 0.0, from_record ? "from-record" : "random"});
  return standby->id;
}

void apply_sanction(SimState& sim, int node_id, Sanction sanction) {
  NodeState& node = sim.node(node_id);
  if (node.role == Role::kDead || node.role == Role::kQuarantined) {
    detail::log_event(sim, {0, LogEvent::kSanctionNoop, std::nullopt, kCoordinator, node_id, 0,
                            0, 0, static_cast<double>(sanction), to_string(sanction)});
    return;
  }
  ++sim.counters.sanctions;
  detail::log_event(sim, {0, LogEvent::kSanction, std::nullopt, kCoordinator, node_id, 0, 0, 0,
                          static_cast<double>(sanction), to_string(sanction)});
  if (sanction == Sanction::kQuarantine) {
    node.role = Role::kQuarantined;
    node.chain.reset();
    Message notice;
    notice.kind = MessageKind::kQuarantine;
    notice.src = kCoordinator;
    notice.dst = kBroadcast;
    notice.subject = node_id;
    if (const auto& g = sim.coordinator.global_best) {
      notice.solution = g->solution;
      notice.energy = g->energy;
    } else {
      notice.energy = std::numeric_limits<double>::infinity();
    }
    send(sim, std::move(notice));
    return;
  }
  Message reset;
  reset.kind = MessageKind::kTempReset;
  reset.src = kCoordinator;
  reset.dst = node_id;
  reset.temperature = sim.config.params.t0;
  // Control messages take the fixed delay of their route; the reset takes
  // effect at delivery, so older reports are ignored from here on.
  send(sim, std::move(reset));
  std::uint64_t effective = sim.now;
  for (const auto& ev : sim.queue) {
    const auto* d = std::get_if<Event::Delivery>(&ev.body);
    if (d && d->msg.kind == MessageKind::kTempReset && d->msg.dst == node_id) {
      effective = std::max(effective, d->msg.delivery_time);
    }
  }
  guard_reset(sim.coordinator.guard, node_id, effective);
}

}  // namespace dsa
