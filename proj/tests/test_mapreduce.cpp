#include <algorithm>
#include <cmath>
#include <memory>
#include <set>
#include <sstream>

#include "doctest.h"
#include "dsa/errors.hpp"
#include "dsa/faults.hpp"
#include "dsa/mapreduce.hpp"

using namespace dsa;

namespace {

ProblemPtr tsp8() { return std::make_shared<TspProblem>(TspProblem::random(8, 7)); }

std::vector<MapTask> tasks(ProblemPtr problem, int n) {
  std::vector<MapTask> out;
  for (int i = 0; i < n; ++i) {
    MapTask t;
    t.task_id = static_cast<std::uint64_t>(i);
    t.problem = problem;
    t.params.t0 = 0.5;
    t.seed = 77;
    t.budget = 2000;
    out.push_back(t);
  }
  return out;
}

}  // namespace

TEST_CASE("a map task is run_chain on its own stream") {
  auto problem = tsp8();
  const auto ts = tasks(problem, 3);
  const auto out = map_phase(ts);
  REQUIRE(out.records.size() == 3);
  for (const auto& t : ts) {
    RngStream rng(t.seed, t.task_id);
    const auto chain = run_chain(*problem, t.params, rng, t.budget);
    CHECK(out.records[t.task_id].energy == chain.best_energy);
    CHECK(out.records[t.task_id].solution == chain.best_solution);
  }
}

TEST_CASE("map output does not depend on worker count or task order") {
  auto problem = tsp8();
  auto ts = tasks(problem, 9);
  const auto serial = map_phase(ts, 1);
  std::reverse(ts.begin(), ts.end());
  const auto parallel = map_phase(ts, 4);
  REQUIRE(serial.records.size() == parallel.records.size());
  for (std::size_t i = 0; i < serial.records.size(); ++i) {
    CHECK(serial.records[i].task_id == parallel.records[i].task_id);
    CHECK(serial.records[i].energy == parallel.records[i].energy);
  }
}

TEST_CASE("map phase reports failed tasks and rejects bad task lists") {
  auto ts = tasks(tsp8(), 4);
  ts[2].inject_failure = true;
  const auto out = map_phase(ts);
  CHECK(out.records.size() == 3);
  CHECK(out.failed == std::vector<std::uint64_t>{2});
  CHECK(out.errors[0].find("task 2") == 0);

  ts[3].task_id = 0;
  CHECK_THROWS_AS(map_phase(ts), ValidationError);
  CHECK_THROWS_AS(map_phase({}), ValidationError);
}

TEST_CASE("equivalent tours share one store slot") {
  auto problem = tsp8();
  IntermediateStore store(problem);
  const Permutation tour{0, 4, 1, 6, 2, 7, 3, 5};
  auto rotated = tour;
  std::rotate(rotated.begin(), rotated.begin() + 3, rotated.end());
  auto reversed = tour;
  std::reverse(reversed.begin(), reversed.end());
  const double e = problem->energy(tour);
  store_intermediate(store, {5, tour, e});
  store_intermediate(store, {3, rotated, e});
  store_intermediate(store, {9, reversed, e + 1});
  CHECK(store.size() == 1);
  const auto* entry = store.find(reversed);
  REQUIRE(entry);
  CHECK(entry->task_id == 3);
  CHECK(entry->energy == e);
  CHECK(store.find(Permutation{0, 1, 2, 3, 4, 5, 6, 7}) == nullptr);
}

TEST_CASE("verification flags exactly the planted corruptions") {
  auto problem = std::make_shared<Skewed1dProblem>();
  IntermediateStore store(problem);
  // Grid spacing well above the 1e-6 key quantum, so every point has a slot.
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const Solution x = -5.0 + 1e-3 * static_cast<double>(i);
    store_intermediate(store, {i, x, problem->energy(x)});
  }
  REQUIRE(store.size() == 10000);
  auto entries = store.mutable_entries();
  std::set<std::uint64_t> planted;
  RngStream pick(4, 4);
  while (planted.size() < 100) {
    StoreEntry* e = entries[pick.uniform_index(entries.size())];
    if (!planted.insert(e->task_id).second) continue;
    e->energy = corrupt_energy(e->energy, pick.uniform());
  }
  const auto bad = verify_intermediates(store);
  std::set<std::uint64_t> flagged;
  for (const auto& m : bad) {
    flagged.insert(m.task_id);
    CHECK(m.kind == MismatchKind::kEnergy);
  }
  CHECK(flagged == planted);
}

TEST_CASE("infeasible entries fail verification") {
  auto problem = tsp8();
  IntermediateStore store(problem);
  store_intermediate(store, {1, Permutation{0, 1, 2, 3, 4, 5, 6, 7}, 1.0});
  store_intermediate(store, {2, Permutation{0, 2, 1, 3, 4, 5, 6, 7}, 1.0});
  CHECK_THROWS_AS(store_intermediate(store, {3, Permutation{0, 0, 2, 3, 4, 5, 6, 7}, 1.0}),
                  ValidationError);
  // A payload damaged after insert.
  for (StoreEntry* e : store.mutable_entries()) {
    if (e->task_id == 2) e->solution = Permutation{0, 0, 2, 3, 4, 5, 6, 7};
  }
  const auto bad = verify_intermediates(store);
  REQUIRE(bad.size() == 2);
  std::size_t infeasible = 0;
  for (const auto& m : bad) infeasible += m.kind == MismatchKind::kInfeasible;
  CHECK(infeasible == 1);
  CHECK_THROWS_AS(reduce_best(store), RuntimeFailure);
}

TEST_CASE("reduce picks the verified minimum with ties to the lower task") {
  auto problem = std::make_shared<Skewed1dProblem>();
  IntermediateStore store(problem);
  store_intermediate(store, {4, -2.0, skewed_energy(-2.0)});
  store_intermediate(store, {7, 3.0, skewed_energy(3.0)});
  store_intermediate(store, {2, 0.0, -50.0});  // lies
  verify_intermediates(store);
  const auto r = reduce_best(store);
  CHECK(r.task_id == 7);
  CHECK(r.verified);

  const ReduceResult a{1.0, 2.0, 9, true}, b{2.0, 2.0, 4, true}, c{3.0, 5.0, 1, true};
  const std::vector<ReduceResult> parts{a, b, c};
  CHECK(reduce_results(parts).task_id == 4);
  CHECK_THROWS_AS(reduce_results({}), RuntimeFailure);
}

TEST_CASE("partial reductions combine to the global reduction") {
  auto problem = tsp8();
  IntermediateStore store(problem);
  const auto out = map_phase(tasks(problem, 12));
  for (const auto& r : out.records) store_intermediate(store, r);
  verify_intermediates(store);
  const auto whole = reduce_best(store);

  std::vector<ReduceResult> partials;
  for (int part = 0; part < 3; ++part) {
    IntermediateStore piece(problem);
    for (const auto& r : out.records) {
      if (r.task_id % 3 == static_cast<std::uint64_t>(part)) store_intermediate(piece, r);
    }
    verify_intermediates(piece);
    partials.push_back(reduce_best(piece));
  }
  const auto combined = reduce_results(partials);
  CHECK(combined.energy == whole.energy);
  CHECK(combined.task_id == whole.task_id);
}

TEST_CASE("scalar keys quantize to 1e-6") {
  auto problem = std::make_shared<Skewed1dProblem>();
  IntermediateStore store(problem);
  store_intermediate(store, {1, 1.0, skewed_energy(1.0)});
  store_intermediate(store, {2, 1.0 + 1e-8, skewed_energy(1.0 + 1e-8)});
  store_intermediate(store, {3, 1.0 + 1e-5, skewed_energy(1.0 + 1e-5)});
  CHECK(store.size() == 2);
}

TEST_CASE("store dump format") {
  auto problem = std::make_shared<Skewed1dProblem>();
  IntermediateStore store(problem);
  store_intermediate(store, {3, -2.0, -1.0});
  std::ostringstream out;
  dump_store(out, store);
  const std::string line = out.str();
  CHECK(line.size() > 17);
  CHECK(line[16] == ' ');
  CHECK(line.substr(17) == "-1 3\n");
}
