#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dsa/anneal.hpp"
#include "dsa/message.hpp"
#include "dsa/rng.hpp"

namespace dsa {

struct SimState;

enum class EccentricKind { kUnderreport, kStuckTemperature, kRisingBest };

const char* to_string(EccentricKind kind);
EccentricKind eccentric_kind_from_string(const std::string& name);

struct CrashSpec {
  int node = 0;
  std::uint64_t tick = 0;
};

struct EccentricSpec {
  int node = 0;
  EccentricKind kind = EccentricKind::kUnderreport;
  std::uint64_t start_tick = 0;
  // Behavior stops at this tick; absent means it never stops.
  std::optional<std::uint64_t> end_tick;
  // UNDERREPORT: claimed = true scaled toward -inf by this factor.
  double factor = 0.5;
  // RISING_BEST increment; absent means 0.1 x |initial energy|.
  std::optional<double> delta;
};

// Crashes drawn uniformly over nodes and a tick window from the scenario
// stream, materialized before the run.
struct RandomCrashSpec {
  std::uint32_t count = 0;
  std::uint64_t min_tick = 1;
  std::uint64_t max_tick = 1;
};

struct FaultScenario {
  std::vector<CrashSpec> crashes;
  std::optional<RandomCrashSpec> random_crashes;
  std::optional<double> loss_probability;
  std::optional<double> corruption_probability;
  std::uint64_t extra_delay = 0;
  std::vector<EccentricSpec> eccentric;

  bool empty() const {
    return crashes.empty() && !random_crashes && !loss_probability &&
           !corruption_probability && extra_delay == 0 && eccentric.empty();
  }
};

// Checks ids, tick ranges and probabilities. Throws ValidationError.
void validate(const FaultScenario& scenario, int node_count,
              std::uint64_t budget_ticks);

// Replaces `random_crashes` with concrete entries. Nodes already listed are
// never drawn twice.
FaultScenario materialize(FaultScenario scenario, int node_count,
                          std::uint64_t master_seed);

FabricConfig apply_overrides(FabricConfig fabric, const FaultScenario& scenario);

enum class FaultKind { kCrash, kDrop, kCorrupt, kEccentricOn, kEccentricOff };

const char* to_string(FaultKind kind);

struct FaultRecord {
  std::uint64_t tick = 0;
  FaultKind kind = FaultKind::kCrash;
  int node = 0;
  std::uint64_t message_seq = 0;

  bool operator==(const FaultRecord&) const = default;
};

using FaultTrace = std::vector<FaultRecord>;

// Per-copy channel stream. Keyed by the sender's logical send counter and
// the destination, so crash schedules never shift other messages' draws.
RngStream fabric_stream(std::uint64_t master_seed, int src,
                        std::uint64_t src_send_index, int dst);

// True when the message is lost. Consumes one draw.
bool maybe_drop(const FabricConfig& fabric, const Message& msg, RngStream& rng);

// With corruption_probability, scales the claimed energy by a nonzero factor
// away from 1 and leaves the solution untouched. Consumes two draws.
Message maybe_corrupt(const FabricConfig& fabric, Message msg, RngStream& rng);

// energy + (f - 1) x max(|energy|, 1e-3) with f in [0.5, 0.99] or
// [1.01, 1.5], picked by one uniform `u` in [0, 1).
double corrupt_energy(double energy, double u);

// Lies below the truth: true - (1 - factor) * max(|true|, 1e-3).
double underreport(double true_energy, double factor);

struct Report {
  Solution solution;
  double energy = 0;
  double temperature = 0;
};

// Payload an eccentric node sends in place of an honest report.
// `report_index` counts this node's prior reports since the behavior began;
// `anchor` is the node's best when it began (RISING_BEST keeps sending that
// solution while the claimed energy climbs).
Report eccentric_report(const EccentricSpec& spec, const ChainState& true_state,
                        std::uint64_t report_index, const Report& anchor,
                        double rising_delta);

// Kills a live node at `tick`: discards its chain and cancels its queued
// messages sent after `tick`. Throws ValidationError on a dead node.
void apply_crash(SimState& sim, int node_id, std::uint64_t tick);

}  // namespace dsa
