#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dsa/anneal.hpp"
#include "dsa/problem.hpp"

namespace dsa {

struct MapTask {
  std::uint64_t task_id = 0;
  ProblemPtr problem;
  AnnealParams params;
  std::uint64_t seed = 0;
  std::uint64_t budget = 1;
  // Test hook: the mapper dies before emitting.
  bool inject_failure = false;
};

struct IntermediateRecord {
  std::uint64_t task_id = 0;
  Solution solution;
  double energy = 0;
};

struct MapOutcome {
  std::vector<IntermediateRecord> records;  // ascending task_id
  std::vector<std::uint64_t> failed;        // ascending task_id
  std::vector<std::string> errors;
};

// Runs each task's chain on RngStream(seed, task_id). Tasks may execute on
// up to `threads` workers; output order is by task_id either way.
MapOutcome map_phase(const std::vector<MapTask>& tasks, unsigned threads = 1);

struct StoreEntry {
  std::uint64_t digest = 0;
  std::string canonical;
  Solution solution;
  double energy = 0;  // reported
  std::uint64_t task_id = 0;
  bool verified = false;
};

// Hash-keyed table of intermediate results. Keys are digests of the
// problem's canonical solution form, so rotations and reflections of a tour
// land in one slot.
class IntermediateStore {
 public:
  explicit IntermediateStore(ProblemPtr problem);

  // Inserts or, for an equal solution, keeps the lower reported energy
  // (then the lower task id).
  void insert(const IntermediateRecord& record);
  const StoreEntry* find(const Solution& solution) const;

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  const Problem& problem() const { return *problem_; }
  ProblemPtr problem_ptr() const { return problem_; }

  // Entries in (digest, canonical) order.
  std::vector<const StoreEntry*> entries() const;
  std::vector<StoreEntry*> mutable_entries();

 private:
  ProblemPtr problem_;
  std::map<std::uint64_t, std::vector<StoreEntry>> buckets_;
  std::size_t size_ = 0;
};

std::uint64_t solution_digest(const std::string& canonical);

void store_intermediate(IntermediateStore& store, const IntermediateRecord& record);

enum class MismatchKind { kEnergy, kInfeasible };

struct Mismatch {
  std::uint64_t digest = 0;
  std::uint64_t task_id = 0;
  double reported = 0;
  double recomputed = 0;  // NaN when infeasible
  MismatchKind kind = MismatchKind::kEnergy;
};

inline constexpr double kVerifyTolerance = 1e-9;

// Recomputes every entry; marks the consistent ones verified and returns
// the rest.
std::vector<Mismatch> verify_intermediates(IntermediateStore& store);

struct ReduceResult {
  Solution solution;
  double energy = 0;
  std::uint64_t task_id = 0;
  bool verified = false;
};

// Minimum verified entry, ties to the lower task id. Throws RuntimeFailure
// when nothing verified survives.
ReduceResult reduce_best(const IntermediateStore& store);

// Combines partial reductions with the same ordering rule.
ReduceResult reduce_results(std::span<const ReduceResult> partials);

// One line per entry: "<digest hex> <energy> <task_id>".
void dump_store(std::ostream& out, const IntermediateStore& store);

}  // namespace dsa
