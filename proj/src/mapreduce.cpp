#include "dsa/mapreduce.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <ostream>
#include <set>

#include "dsa/errors.hpp"
#include "dsa/text.hpp"

namespace dsa {

namespace {

struct TaskOutput {
  std::optional<IntermediateRecord> record;
  std::string error;
};

TaskOutput run_task(const MapTask& task) {
  TaskOutput out;
  try {
    if (!task.problem) throw ValidationError("task has no problem");
    if (task.inject_failure) throw RuntimeFailure("injected mapper failure");
    RngStream rng(task.seed, task.task_id);
    const ChainState chain = run_chain(*task.problem, task.params, rng, task.budget);
    out.record = IntermediateRecord{task.task_id, chain.best_solution, chain.best_energy};
  } catch (const std::exception& e) {
    out.error = "task " + std::to_string(task.task_id) + ": " + e.what();
  }
  return out;
}

}  // namespace

MapOutcome map_phase(const std::vector<MapTask>& tasks, unsigned threads) {
  if (tasks.empty()) throw ValidationError("map_phase needs at least one task");
  std::set<std::uint64_t> ids;
  for (const auto& t : tasks) {
    if (!ids.insert(t.task_id).second) {
      throw ValidationError("duplicate task_id " + std::to_string(t.task_id));
    }
  }

  std::vector<TaskOutput> outputs(tasks.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) outputs[i] = run_task(tasks[i]);
  } else {
    // Strided partition; each worker owns disjoint output slots.
    std::vector<std::future<void>> workers;
    for (unsigned w = 0; w < threads; ++w) {
      workers.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t i = w; i < tasks.size(); i += threads) outputs[i] = run_task(tasks[i]);
      }));
    }
    for (auto& f : workers) f.get();
  }

  std::vector<std::size_t> order(tasks.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return tasks[a].task_id < tasks[b].task_id; });

  MapOutcome outcome;
  for (std::size_t i : order) {
    if (outputs[i].record) {
      outcome.records.push_back(std::move(*outputs[i].record));
    } else {
      outcome.failed.push_back(tasks[i].task_id);
      outcome.errors.push_back(std::move(outputs[i].error));
    }
  }
  return outcome;
}

std::uint64_t solution_digest(const std::string& canonical) {
  // FNV-1a, then a finalizer to spread the low bits.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

IntermediateStore::IntermediateStore(ProblemPtr problem) : problem_(std::move(problem)) {
  if (!problem_) throw ValidationError("store needs a problem");
}

void IntermediateStore::insert(const IntermediateRecord& record) {
  std::string canonical = problem_->canonical_key(record.solution);
  const std::uint64_t digest = solution_digest(canonical);
  auto& bucket = buckets_[digest];
  for (auto& entry : bucket) {
    if (entry.canonical != canonical) continue;
    if (record.energy < entry.energy ||
        (record.energy == entry.energy && record.task_id < entry.task_id)) {
      entry.energy = record.energy;
      entry.task_id = record.task_id;
      entry.solution = record.solution;
      entry.verified = false;
    }
    return;
  }
  bucket.push_back({digest, std::move(canonical), record.solution, record.energy,
                    record.task_id, false});
  ++size_;
}

const StoreEntry* IntermediateStore::find(const Solution& solution) const {
  const std::string canonical = problem_->canonical_key(solution);
  const auto it = buckets_.find(solution_digest(canonical));
  if (it == buckets_.end()) return nullptr;
  for (const auto& entry : it->second) {
    if (entry.canonical == canonical) return &entry;
  }
  return nullptr;
}

std::vector<const StoreEntry*> IntermediateStore::entries() const {
  std::vector<const StoreEntry*> out;
  out.reserve(size_);
  for (const auto& [digest, bucket] : buckets_) {
    for (const auto& e : bucket) out.push_back(&e);
  }
  return out;
}

std::vector<StoreEntry*> IntermediateStore::mutable_entries() {
  std::vector<StoreEntry*> out;
  out.reserve(size_);
  for (auto& [digest, bucket] : buckets_) {
    for (auto& e : bucket) out.push_back(&e);
  }
  return out;
}

void store_intermediate(IntermediateStore& store, const IntermediateRecord& record) {
  store.insert(record);
}

std::vector<Mismatch> verify_intermediates(IntermediateStore& store) {
  std::vector<Mismatch> bad;
  for (StoreEntry* e : store.mutable_entries()) {
    double truth;
    try {
      truth = store.problem().energy(e->solution);
    } catch (const ValidationError&) {
      e->verified = false;
      bad.push_back({e->digest, e->task_id, e->energy,
                     std::numeric_limits<double>::quiet_NaN(), MismatchKind::kInfeasible});
      continue;
    }
    if (std::abs(e->energy - truth) > kVerifyTolerance) {
      e->verified = false;
      bad.push_back({e->digest, e->task_id, e->energy, truth, MismatchKind::kEnergy});
    } else {
      e->verified = true;
    }
  }
  return bad;
}

namespace {

bool precedes(double energy, std::uint64_t task, const ReduceResult& than) {
  return energy < than.energy || (energy == than.energy && task < than.task_id);
}

}  // namespace

ReduceResult reduce_best(const IntermediateStore& store) {
  std::optional<ReduceResult> best;
  for (const StoreEntry* e : store.entries()) {
    if (!e->verified) continue;
    if (!best || precedes(e->energy, e->task_id, *best)) {
      best = ReduceResult{e->solution, e->energy, e->task_id, true};
    }
  }
  if (!best) throw RuntimeFailure("reduce: no verified entries left");
  return *best;
}

ReduceResult reduce_results(std::span<const ReduceResult> partials) {
  if (partials.empty()) throw RuntimeFailure("reduce: no partial results");
  ReduceResult best = partials.front();
  for (const auto& r : partials.subspan(1)) {
    if (precedes(r.energy, r.task_id, best)) best = r;
  }
  return best;
}

void dump_store(std::ostream& out, const IntermediateStore& store) {
  char hex[17];
  for (const StoreEntry* e : store.entries()) {
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(e->digest));
    out << hex << ' ' << format_double(e->energy) << ' ' << e->task_id << '\n';
  }
}

}  // namespace dsa
