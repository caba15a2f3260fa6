#include "dsa/anneal.hpp"

#include <cmath>
#include <string>

#include "dsa/errors.hpp"

namespace dsa {

void validate(const AnnealParams& p) {
  if (!(p.k > 0) || !std::isfinite(p.k)) throw ParameterError("k must be > 0");
  if (!(p.t_low > 0) || !std::isfinite(p.t_low)) throw ParameterError("t_low must be > 0");
  if (!(p.t0 > p.t_low) || !std::isfinite(p.t0)) throw ParameterError("t0 must exceed t_low");
  if (!(p.p_e0 > 0 && p.p_e0 < 1)) throw ParameterError("p_e0 must lie in (0, 1)");
  if (!(p.alpha > 0 && p.alpha < 1)) throw ParameterError("alpha must lie in (0, 1)");
  if (p.steps_per_temperature == 0) throw ParameterError("steps_per_temperature must be >= 1");
}

double boltzmann_probability(double delta_e, double t, double k) {
  if (!(t > 0)) throw ParameterError("temperature must be > 0");
  if (!(k > 0)) throw ParameterError("k must be > 0");
  if (delta_e <= 0) return 1.0;
  return std::exp(-delta_e / (k * t));
}

bool metropolis_accept(double current_e, double candidate_e, double t, double k,
                       RngStream& rng) {
  const double p = boltzmann_probability(candidate_e - current_e, t, k);
  if (candidate_e <= current_e) return true;
  return rng.uniform() < p;
}

double cool(const AnnealParams& params, double t) {
  if (t < params.t_low) {
    throw StateError("temperature already below t_low; chain has finished");
  }
  return std::max(params.t_low, params.alpha * t);
}

double t0_from_mean_increase(double mean_increase, double p_e0, double k) {
  if (!(p_e0 > 0 && p_e0 < 1)) throw ParameterError("p_e0 must lie in (0, 1)");
  if (!(k > 0)) throw ParameterError("k must be > 0");
  if (!(mean_increase > 0)) throw RuntimeFailure("degenerate landscape: no worsening moves");
  return mean_increase / (-k * std::log(p_e0));
}

Calibration calibrate_t0(const Problem& problem, double p_e0, double k,
                         std::uint32_t warmup_steps, RngStream& rng) {
  if (warmup_steps < 10) throw ParameterError("warmup_steps must be >= 10");
  Solution s = problem.random_solution(rng);
  double e = problem.energy(s);
  double sum = 0;
  std::uint64_t worsening = 0;
  for (std::uint32_t i = 0; i < warmup_steps; ++i) {
    Solution next = problem.neighbor(s, rng, 1.0);
    const double next_e = problem.energy(next);
    if (next_e > e) {
      sum += next_e - e;
      ++worsening;
    }
    s = std::move(next);
    e = next_e;
  }
  if (worsening == 0) {
    throw RuntimeFailure("degenerate landscape: no worsening move in " +
                         std::to_string(warmup_steps) + " warm-up steps");
  }
  const double mean = sum / static_cast<double>(worsening);
  return {t0_from_mean_increase(mean, p_e0, k), mean, worsening};
}

ChainState start_chain(const Problem& problem, const AnnealParams& params,
                       RngStream& rng) {
  ChainState chain;
  chain.current_solution = problem.random_solution(rng);
  chain.current_energy = problem.energy(chain.current_solution);
  chain.best_solution = chain.current_solution;
  chain.best_energy = chain.current_energy;
  chain.temperature = params.t0;
  return chain;
}

ChainState anneal_step(ChainState chain, const Problem& problem,
                       const AnnealParams& params, RngStream& rng, Cooling cooling) {
  if (chain.temperature < params.t_low) {
    throw StateError("anneal_step on a chain below t_low");
  }
  const double ratio = chain.temperature / params.t0;
  for (int attempt = 0; attempt < kInfeasibleRetryLimit; ++attempt) {
    Solution candidate = problem.neighbor(chain.current_solution, rng, ratio);
    double candidate_e;
    try {
      candidate_e = problem.energy(candidate);
    } catch (const ValidationError&) {
      continue;
    }
    if (metropolis_accept(chain.current_energy, candidate_e, chain.temperature,
                          params.k, rng)) {
      chain.current_solution = std::move(candidate);
      chain.current_energy = candidate_e;
      if (candidate_e < chain.best_energy) {
        chain.best_solution = chain.current_solution;
        chain.best_energy = candidate_e;
      }
    }
    break;
  }

  if (chain.temperature == params.t_low) ++chain.steps_at_floor;
  ++chain.step_count;
  if (cooling == Cooling::kEnabled &&
      chain.step_count % params.steps_per_temperature == 0) {
    chain.temperature = cool(params, chain.temperature);
  }
  return chain;
}

bool chain_finished(const ChainState& chain, const AnnealParams& params) {
  return chain.steps_at_floor >= params.steps_per_temperature;
}

ChainState run_chain(const Problem& problem, const AnnealParams& params,
                     RngStream& rng, std::uint64_t budget,
                     const ChainObserver& observer) {
  if (budget < 1) throw ParameterError("run_chain budget must be >= 1");
  validate(params);
  ChainState chain = start_chain(problem, params, rng);
  while (chain.step_count < budget && !chain_finished(chain, params)) {
    chain = anneal_step(std::move(chain), problem, params, rng);
    if (observer) observer(chain);
  }
  return chain;
}

}  // namespace dsa
