#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <string>

#include "dsa/anneal.hpp"

namespace dsa {

struct SimState;

enum class Sanction { kQuarantine, kTempReset };
enum class SanctionPolicy { kAuto, kQuarantine, kTempReset };

const char* to_string(Sanction sanction);

struct ToleranceConfig {
  bool hot_standby = false;
  bool hybrid_replication = false;
  bool gradient_guard = false;
  double theta = 0.1;
  double rho = 0.25;
  std::uint32_t guard_window = 8;
  double eps = 0;
  SanctionPolicy sanction = SanctionPolicy::kAuto;

  bool any() const { return hot_standby || hybrid_replication || gradient_guard; }
};

void validate(const ToleranceConfig& config);

// t_low * (t0 / t_low)^theta.
double replication_threshold(const AnnealParams& params, double theta);

// True once t has fallen to the replication threshold.
bool replication_active(double t, const AnnealParams& params, double theta);

// ---------------------------------------------------------------------------
// Gradient guard

struct GuardReport {
  std::uint64_t tick = 0;  // send tick of the report
  double best_energy = 0;
  double temperature = 0;
};

enum class GuardRule {
  kNone,
  kRisingEnergy,       // best-so-far went up
  kRisingTemperature,  // T went up
  kRecomputeMismatch,  // claimed energy is not the solution's energy
  kFrozenTemperature,  // full window, T constant above t_low across a plateau
};

const char* to_string(GuardRule rule);

enum class Verdict { kNormal, kFlagged };

struct GuardNode {
  std::deque<GuardReport> window;  // sorted by tick
  bool flagged = false;            // sticky for the rest of the run
  std::uint32_t flag_count = 0;
  std::uint64_t ignore_before = 0;
};

struct GuardState {
  std::uint32_t window = 8;
  double eps = 0;
  double t_low = 0;
  std::uint32_t steps_per_temperature = 1;
  std::map<int, GuardNode> nodes;
};

GuardState make_guard(const ToleranceConfig& config, const AnnealParams& params);

struct GuardResult {
  Verdict verdict = Verdict::kNormal;
  GuardRule rule = GuardRule::kNone;
};

// Records one report. `recompute_mismatch` carries the coordinator's own
// recompute verdict for the payload. Reports older than the node's last
// reset are ignored.
GuardResult guard_observe(GuardState& guard, int node_id, const GuardReport& report,
                          bool recompute_mismatch);

// Clears a node's history after a temperature reset takes effect.
void guard_reset(GuardState& guard, int node_id, std::uint64_t effective_tick);

Sanction choose_sanction(SanctionPolicy policy, GuardRule rule);

// ---------------------------------------------------------------------------
// Strategies acting on the simulator.

// Switches the ceil(rho x live searchers) worst searchers to RECIPROCATOR,
// keeping at least one searcher. Returns how many were promoted.
int promote_reciprocators(SimState& sim, double rho);

// Activates the lowest-id STANDBY in place of `dead_node_id`. Returns the
// activated id, or -1 when the pool is empty.
int hot_standby_replace(SimState& sim, int dead_node_id);

void apply_sanction(SimState& sim, int node_id, Sanction sanction);

}  // namespace dsa
