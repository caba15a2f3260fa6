#include "dsa/message.hpp"

#include <cmath>

#include "dsa/errors.hpp"

namespace dsa {

const char* to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::kBestFound: return "BEST_FOUND";
    case MessageKind::kHeartbeat: return "HEARTBEAT";
    case MessageKind::kReplica: return "REPLICA";
    case MessageKind::kTempReset: return "TEMP_RESET";
    case MessageKind::kQuarantine: return "QUARANTINE";
  }
  return "?";
}

void validate(const FabricConfig& f) {
  if (!(f.loss_probability >= 0 && f.loss_probability < 1)) {
    throw ParameterError("loss_probability must lie in [0, 1)");
  }
  if (!(f.corruption_probability >= 0 && f.corruption_probability < 1)) {
    throw ParameterError("corruption_probability must lie in [0, 1)");
  }
  if (!(f.per_message_cost >= 0) || !std::isfinite(f.per_message_cost)) {
    throw ParameterError("per_message_cost must be >= 0");
  }
}

}  // namespace dsa
