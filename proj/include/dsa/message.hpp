#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "dsa/problem.hpp"

namespace dsa {

inline constexpr int kCoordinator = -1;
inline constexpr int kBroadcast = -2;

enum class MessageKind { kBestFound, kHeartbeat, kReplica, kTempReset, kQuarantine };
inline constexpr std::size_t kMessageKindCount = 5;

const char* to_string(MessageKind kind);

// Control-plane traffic rides a reliable channel; only BEST_FOUND and
// REPLICA are exposed to loss and corruption.
inline bool is_data_plane(MessageKind kind) {
  return kind == MessageKind::kBestFound || kind == MessageKind::kReplica;
}

struct Message {
  MessageKind kind = MessageKind::kHeartbeat;
  int src = kCoordinator;
  int dst = kCoordinator;
  std::uint64_t seq = 0;  // unique per copy, assigned at send
  Solution solution;
  double energy = 0;       // claimed energy of `solution`
  double temperature = 0;  // sender temperature; new T for TEMP_RESET
  int subject = -1;        // QUARANTINE target
  std::uint64_t send_time = 0;
  std::uint64_t delivery_time = 0;
  // Fault bookkeeping only; receivers never read it.
  bool corrupted = false;
};

struct FabricConfig {
  std::uint64_t base_delay = 1;
  std::uint64_t jitter = 0;
  double loss_probability = 0;
  double corruption_probability = 0;
  double per_message_cost = 0;
};

void validate(const FabricConfig& fabric);

}  // namespace dsa
