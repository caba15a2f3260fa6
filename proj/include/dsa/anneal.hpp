#pragma once

#include <cstdint>
#include <functional>

#include "dsa/problem.hpp"
#include "dsa/rng.hpp"

namespace dsa {

struct AnnealParams {
  double k = 1.0;
  double t0 = 1.0;
  double t_low = 1e-3;
  double p_e0 = 0.8;
  double alpha = 0.95;
  std::uint32_t steps_per_temperature = 50;
};

// Throws ParameterError naming the first violated range.
void validate(const AnnealParams& params);

struct ChainState {
  Solution current_solution;
  double current_energy = 0;
  Solution best_solution;
  double best_energy = 0;
  double temperature = 0;
  std::uint64_t step_count = 0;
  // Steps executed while already clamped at t_low.
  std::uint64_t steps_at_floor = 0;

  bool operator==(const ChainState&) const = default;
};

// min(1, exp(-delta_e / (k t))).
double boltzmann_probability(double delta_e, double t, double k);

// Draws one uniform from `rng` only when the candidate is worse.
bool metropolis_accept(double current_e, double candidate_e, double t, double k,
                       RngStream& rng);

// One geometric cooling step, clamped at t_low.
double cool(const AnnealParams& params, double t);

// Temperature whose Boltzmann acceptance of the mean worsening move equals
// p_e0: mean_increase / (-k ln p_e0).
double t0_from_mean_increase(double mean_increase, double p_e0, double k);

struct Calibration {
  double t0 = 0;
  double mean_increase = 0;
  std::uint64_t worsening_moves = 0;
};

// Random walk of `warmup_steps` unconditional neighbor moves from a fresh
// solution; returns the temperature that accepts the mean worsening move
// with probability p_e0.
Calibration calibrate_t0(const Problem& problem, double p_e0, double k,
                         std::uint32_t warmup_steps, RngStream& rng);

inline constexpr int kInfeasibleRetryLimit = 16;

ChainState start_chain(const Problem& problem, const AnnealParams& params,
                       RngStream& rng);

// Chain variants used by the simulator. Honest chains always cool.
enum class Cooling { kEnabled, kFrozen };

ChainState anneal_step(ChainState chain, const Problem& problem,
                       const AnnealParams& params, RngStream& rng,
                       Cooling cooling = Cooling::kEnabled);

// True once the chain has spent one full plateau clamped at t_low.
bool chain_finished(const ChainState& chain, const AnnealParams& params);

using ChainObserver = std::function<void(const ChainState&)>;

// Starts a chain and steps it until chain_finished or `budget` steps.
// `observer`, when set, sees the state after every step.
ChainState run_chain(const Problem& problem, const AnnealParams& params,
                     RngStream& rng, std::uint64_t budget,
                     const ChainObserver& observer = {});

}  // namespace dsa
