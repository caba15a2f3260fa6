#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dsa/rng.hpp"

namespace dsa {

using Permutation = std::vector<int>;

// A point in some search space: a permutation for the combinatorial
// problems, a scalar for the 1-D landscape.
using Solution = std::variant<Permutation, double>;

enum class ProblemKind { kTsp, kJobShop, kSkewed1d };

const char* to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& name);

// Throws ValidationError unless `perm` is a permutation of 0..n-1.
void validate_permutation(const Permutation& perm, std::size_t n);

class Problem {
 public:
  virtual ~Problem() = default;

  virtual ProblemKind kind() const = 0;
  virtual Solution random_solution(RngStream& rng) const = 0;
  // `temperature_ratio` is T/T0; only the continuous move uses it.
  virtual Solution neighbor(const Solution& s, RngStream& rng,
                            double temperature_ratio) const = 0;
  // Throws ValidationError on an infeasible solution.
  virtual double energy(const Solution& s) const = 0;
  virtual void validate(const Solution& s) const = 0;
  // Serialization that maps semantically equal solutions to equal bytes.
  virtual std::string canonical_key(const Solution& s) const = 0;
};

using ProblemPtr = std::shared_ptr<const Problem>;

std::string solution_to_string(const Solution& s);

// ---------------------------------------------------------------------------
// Euclidean TSP, 2-opt neighborhood.

struct City {
  double x = 0;
  double y = 0;
};

class TspProblem final : public Problem {
 public:
  explicit TspProblem(std::vector<City> cities);

  // Uniform cities in the unit square, drawn from the kProblem stream.
  static TspProblem random(std::size_t n, std::uint64_t seed);

  ProblemKind kind() const override { return ProblemKind::kTsp; }
  Solution random_solution(RngStream& rng) const override;
  Solution neighbor(const Solution& s, RngStream& rng,
                    double temperature_ratio) const override;
  double energy(const Solution& s) const override;
  void validate(const Solution& s) const override;
  std::string canonical_key(const Solution& s) const override;

  const std::vector<City>& cities() const { return cities_; }
  std::size_t size() const { return cities_.size(); }

 private:
  std::vector<City> cities_;
};

double tsp_energy(const Permutation& tour, const std::vector<City>& cities);
// Reverses tour[i..j] for a uniformly chosen pair i <= j.
Permutation tsp_neighbor(const Permutation& tour, RngStream& rng);
// Rotate to start at city 0, then pick the lexicographically smaller
// direction.
Permutation canonical_tour(const Permutation& tour);

// ---------------------------------------------------------------------------
// Job shop with a priority-list decode.

struct Operation {
  int machine = 0;
  double duration = 0;
};

struct JobShopInstance {
  int machines = 0;
  std::vector<std::vector<Operation>> jobs;

  std::size_t operation_count() const;
};

void validate_instance(const JobShopInstance& instance);

// Makespan of the non-delay list schedule driven by `priority`, a
// permutation over flat operation ids (job-major order). Earlier in the
// list means higher priority.
double jobshop_energy(const Permutation& priority,
                      const JobShopInstance& instance);

class JobShopProblem final : public Problem {
 public:
  explicit JobShopProblem(JobShopInstance instance);

  ProblemKind kind() const override { return ProblemKind::kJobShop; }
  Solution random_solution(RngStream& rng) const override;
  Solution neighbor(const Solution& s, RngStream& rng,
                    double temperature_ratio) const override;
  double energy(const Solution& s) const override;
  void validate(const Solution& s) const override;
  std::string canonical_key(const Solution& s) const override;

  const JobShopInstance& instance() const { return instance_; }

 private:
  JobShopInstance instance_;
};

// ---------------------------------------------------------------------------
// Skewed 1-D landscape: a deep narrow well near x=3 and a shallow broad one
// near x=-2.

namespace skewed {
inline constexpr double kLower = -5.0;
inline constexpr double kUpper = 5.0;
inline constexpr double kNarrowCenter = 3.0;
inline constexpr double kNarrowWidth = 0.05;
inline constexpr double kNarrowDepth = 1.2;
inline constexpr double kBroadCenter = -2.0;
inline constexpr double kBroadWidth = 1.0;
inline constexpr double kBroadDepth = 1.0;
// Basin membership radii used by the experiments.
inline constexpr double kGlobalBasinRadius = 0.5;
inline constexpr double kLocalBasinRadius = 1.5;
}  // namespace skewed

double skewed_energy(double x);
bool in_global_basin(double x);
bool in_local_basin(double x);

class Skewed1dProblem final : public Problem {
 public:
  ProblemKind kind() const override { return ProblemKind::kSkewed1d; }
  Solution random_solution(RngStream& rng) const override;
  // x' = clamp(x + g * (0.02 + 0.5 * T/T0)), g standard normal.
  Solution neighbor(const Solution& s, RngStream& rng,
                    double temperature_ratio) const override;
  double energy(const Solution& s) const override;
  void validate(const Solution& s) const override;
  std::string canonical_key(const Solution& s) const override;
};

// ---------------------------------------------------------------------------
// Instance files.

// Line 1: n. Then n lines "x y".
std::vector<City> load_tsp(std::istream& in);
std::vector<City> load_tsp_file(const std::string& path);
// Line 1: "J M". Then J lines of M pairs "machine duration".
JobShopInstance load_jobshop(std::istream& in);
JobShopInstance load_jobshop_file(const std::string& path);

// ---------------------------------------------------------------------------
// Exhaustive oracle.

inline constexpr std::size_t kMaxOracleCities = 10;
inline constexpr std::size_t kMaxOracleOperations = 8;
inline constexpr std::size_t kSkewedGridPoints = 1'000'001;

struct Optimum {
  Solution solution;
  double energy = 0;
};

// Exact optimum by enumeration (TSP, job shop) or dense grid plus golden
// section refinement (skewed1d). Refuses instances above the size caps.
Optimum brute_force_optimum(const Problem& problem);

}  // namespace dsa
