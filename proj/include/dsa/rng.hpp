#pragma once

#include <array>
#include <cstdint>

namespace dsa {

// Philox4x64-10 counter-based generator. A stream is keyed by
// (seed, stream_id); the block counter walks forward from zero, so any
// position in any stream can be recomputed without replaying the others.
//
// Streams with equal (seed, stream_id) yield identical sequences; distinct
// keys are independent by the construction of the cipher.
class RngStream {
 public:
  using Block = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits. Consumes one 64-bit word.
  double uniform();
  // Uniform integer in [0, n), rejection sampled so it stays unbiased.
  std::uint64_t uniform_index(std::uint64_t n);
  // Standard normal via Box-Muller. Consumes exactly two words.
  double gaussian();

  std::uint64_t seed() const { return key_[0]; }
  std::uint64_t stream_id() const { return key_[1]; }
  // Number of 64-bit words drawn so far.
  std::uint64_t draws() const { return draws_; }

  bool operator==(const RngStream& other) const = default;

  // The raw block function, exposed for known-answer tests.
  static Block philox(Block counter, Key key);

 private:
  Key key_;
  std::uint64_t block_index_ = 0;
  Block buffer_{};
  unsigned used_ = 4;
  std::uint64_t draws_ = 0;
};

// Stream-id namespaces. Chain streams use the plain node index; everything
// else lives above bit 56 so it can never alias a node.
enum class StreamPurpose : std::uint64_t {
  kChain = 0,
  kProtocol = 1,   // per-node adoption and eccentric draws
  kFabric = 2,     // per-message channel draws
  kProblem = 3,    // instance generation
  kCalibration = 4,
  kScenario = 5,   // stochastic fault schedules
};

std::uint64_t derive_stream_id(StreamPurpose purpose, std::uint64_t a,
                               std::uint64_t b = 0);

// SplitMix64 finalizer; also used for digests.
std::uint64_t mix64(std::uint64_t x);

}  // namespace dsa
