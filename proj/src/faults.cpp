#include "dsa/faults.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "dsa/cluster.hpp"
#include "dsa/errors.hpp"

namespace dsa {

const char* to_string(EccentricKind kind) {
  switch (kind) {
    case EccentricKind::kUnderreport: return "UNDERREPORT";
    case EccentricKind::kStuckTemperature: return "STUCK_TEMPERATURE";
    case EccentricKind::kRisingBest: return "RISING_BEST";
  }
  return "?";
}

EccentricKind eccentric_kind_from_string(const std::string& name) {
  if (name == "UNDERREPORT") return EccentricKind::kUnderreport;
  if (name == "STUCK_TEMPERATURE") return EccentricKind::kStuckTemperature;
  if (name == "RISING_BEST") return EccentricKind::kRisingBest;
  throw ValidationError("unknown eccentric kind '" + name + "'");
}

const char* to_string(FaultKind kind) {
  switch (kind) {
    case FaultKind::kCrash: return "CRASH";
    case FaultKind::kDrop: return "DROP";
    case FaultKind::kCorrupt: return "CORRUPT";
    case FaultKind::kEccentricOn: return "ECCENTRIC_ON";
    case FaultKind::kEccentricOff: return "ECCENTRIC_OFF";
  }
  return "?";
}

void validate(const FaultScenario& s, int node_count, std::uint64_t budget_ticks) {
  std::set<int> crashed;
  for (const auto& c : s.crashes) {
    if (c.node < 0 || c.node >= node_count) {
      throw ValidationError("crash names node " + std::to_string(c.node) +
                            " outside 0.." + std::to_string(node_count - 1));
    }
    if (c.tick < 1 || c.tick > budget_ticks) {
      throw ValidationError("crash tick " + std::to_string(c.tick) + " outside the run");
    }
    if (!crashed.insert(c.node).second) {
      throw ValidationError("node " + std::to_string(c.node) + " crashes twice");
    }
  }
  if (s.random_crashes) {
    const auto& r = *s.random_crashes;
    if (r.min_tick < 1 || r.max_tick < r.min_tick) {
      throw ValidationError("random_crashes tick window is empty");
    }
    if (r.count + s.crashes.size() > static_cast<std::size_t>(node_count)) {
      throw ValidationError("more crashes than nodes");
    }
  }
  if (s.loss_probability && !(*s.loss_probability >= 0 && *s.loss_probability < 1)) {
    throw ValidationError("loss_probability must lie in [0, 1)");
  }
  if (s.corruption_probability &&
      !(*s.corruption_probability >= 0 && *s.corruption_probability < 1)) {
    throw ValidationError("corruption_probability must lie in [0, 1)");
  }
  std::set<int> eccentric;
  for (const auto& e : s.eccentric) {
    if (e.node < 0 || e.node >= node_count) {
      throw ValidationError("eccentric entry names node " + std::to_string(e.node) +
                            " outside the cluster");
    }
    if (!eccentric.insert(e.node).second) {
      throw ValidationError("node " + std::to_string(e.node) + " listed as eccentric twice");
    }
    if (e.end_tick && *e.end_tick <= e.start_tick) {
      throw ValidationError("eccentric end_tick must follow start_tick");
    }
    if (!(e.factor > 0 && e.factor < 1)) {
      throw ValidationError("eccentric factor must lie in (0, 1)");
    }
    if (e.delta && !(*e.delta > 0)) throw ValidationError("eccentric delta must be > 0");
  }
}

FaultScenario materialize(FaultScenario s, int node_count, std::uint64_t master_seed) {
  if (!s.random_crashes) return s;
  const RandomCrashSpec spec = *s.random_crashes;
  s.random_crashes.reset();
  if (spec.min_tick < 1 || spec.max_tick < spec.min_tick) {
    throw ValidationError("random_crashes tick window is empty");
  }
  std::vector<int> pool;
  std::set<int> taken;
  for (const auto& c : s.crashes) taken.insert(c.node);
  for (int i = 0; i < node_count; ++i) {
    if (!taken.count(i)) pool.push_back(i);
  }
  if (spec.count > pool.size()) throw ValidationError("more crashes than nodes");
  RngStream rng(master_seed, derive_stream_id(StreamPurpose::kScenario, 0));
  for (std::uint32_t i = 0; i < spec.count; ++i) {
    const std::size_t pick = rng.uniform_index(pool.size());
    const std::uint64_t tick =
        spec.min_tick + rng.uniform_index(spec.max_tick - spec.min_tick + 1);
    s.crashes.push_back({pool[pick], tick});
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return s;
}

FabricConfig apply_overrides(FabricConfig fabric, const FaultScenario& s) {
  if (s.loss_probability) fabric.loss_probability = *s.loss_probability;
  if (s.corruption_probability) fabric.corruption_probability = *s.corruption_probability;
  fabric.base_delay += s.extra_delay;
  return fabric;
}

RngStream fabric_stream(std::uint64_t master_seed, int src, std::uint64_t src_send_index,
                        int dst) {
  const std::uint64_t route = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(src + 2)) << 32) |
                              static_cast<std::uint32_t>(dst + 2);
  return RngStream(master_seed,
                   derive_stream_id(StreamPurpose::kFabric, route, src_send_index));
}

bool maybe_drop(const FabricConfig& fabric, const Message& /*msg*/, RngStream& rng) {
  if (!(fabric.loss_probability >= 0 && fabric.loss_probability < 1)) {
    throw ParameterError("loss_probability must lie in [0, 1)");
  }
  return rng.uniform() < fabric.loss_probability;
}

Message maybe_corrupt(const FabricConfig& fabric, Message msg, RngStream& rng) {
  if (!(fabric.corruption_probability >= 0 && fabric.corruption_probability < 1)) {
    throw ParameterError("corruption_probability must lie in [0, 1)");
  }
  const double hit = rng.uniform();
  const double u = rng.uniform();
  if (!is_data_plane(msg.kind) || !(hit < fabric.corruption_probability)) return msg;
  msg.energy = corrupt_energy(msg.energy, u);
  msg.corrupted = true;
  return msg;
}

double corrupt_energy(double energy, double u) {
  // Low half of u picks a factor in (0.5, 0.99], high half one in [1.01, 1.5).
  const bool lower = u < 0.5;
  const double frac = lower ? 2.0 * u : 2.0 * u - 1.0;
  const double offset = 0.01 + 0.49 * frac;
  const double factor = lower ? 1.0 - offset : 1.0 + offset;
  return energy + (factor - 1.0) * std::max(std::abs(energy), 1e-3);
}

double underreport(double true_energy, double factor) {
  return true_energy - (1.0 - factor) * std::max(std::abs(true_energy), 1e-3);
}

Report eccentric_report(const EccentricSpec& spec, const ChainState& s,
                        std::uint64_t report_index, const Report& anchor,
                        double rising_delta) {
  switch (spec.kind) {
    case EccentricKind::kUnderreport:
      return {s.best_solution, underreport(s.best_energy, spec.factor), s.temperature};
    case EccentricKind::kStuckTemperature:
      return {s.best_solution, s.best_energy, s.temperature};
    case EccentricKind::kRisingBest:
      return {anchor.solution,
              anchor.energy + rising_delta * static_cast<double>(report_index), s.temperature};
  }
  throw StateError("unknown eccentric kind");
}

void apply_crash(SimState& sim, int node_id, std::uint64_t tick) {
  NodeState& node = sim.node(node_id);
  if (node.role == Role::kDead) {
    throw ValidationError("node " + std::to_string(node_id) + " is already dead");
  }
  node.role_before_death = node.role;
  node.role = Role::kDead;
  node.chain.reset();
  node.eccentric_active = false;

  for (auto it = sim.queue.begin(); it != sim.queue.end();) {
    const auto* d = std::get_if<Event::Delivery>(&it->body);
    if (d && d->msg.src == node_id && d->msg.send_time > tick) {
      detail::log_event(sim, {0, LogEvent::kCancel, d->msg.kind, d->msg.src, d->msg.dst,
                              d->msg.seq, d->msg.energy, d->msg.temperature, 0, {}});
      it = sim.queue.erase(it);
    } else {
      ++it;
    }
  }
  detail::log_event(sim, {0, LogEvent::kCrash, std::nullopt, node_id, node_id, 0, 0, 0,
                          static_cast<double>(tick), to_string(node.role_before_death)});
  detail::record_fault(sim, FaultKind::kCrash, node_id, 0);
}

}  // namespace dsa
