#include "dsa/problem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "dsa/errors.hpp"
#include "dsa/text.hpp"

namespace dsa {

const char* to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::kTsp: return "tsp";
    case ProblemKind::kJobShop: return "jobshop";
    case ProblemKind::kSkewed1d: return "skewed1d";
  }
  return "?";
}

ProblemKind problem_kind_from_string(const std::string& name) {
  if (name == "tsp") return ProblemKind::kTsp;
  if (name == "jobshop") return ProblemKind::kJobShop;
  if (name == "skewed1d") return ProblemKind::kSkewed1d;
  throw ValidationError("unknown problem kind '" + name + "'");
}

void validate_permutation(const Permutation& perm, std::size_t n) {
  if (perm.size() != n) {
    throw ValidationError("permutation has " + std::to_string(perm.size()) +
                          " entries, expected " + std::to_string(n));
  }
  std::vector<bool> seen(n, false);
  for (int v : perm) {
    if (v < 0 || static_cast<std::size_t>(v) >= n || seen[v]) {
      throw ValidationError("not a permutation of 0.." + std::to_string(n - 1));
    }
    seen[v] = true;
  }
}

std::string solution_to_string(const Solution& s) {
  if (const auto* x = std::get_if<double>(&s)) return format_double(*x);
  const auto& perm = std::get<Permutation>(s);
  std::string out;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (i) out += '-';
    out += std::to_string(perm[i]);
  }
  return out;
}

namespace {

const Permutation& as_permutation(const Solution& s) {
  const auto* p = std::get_if<Permutation>(&s);
  if (!p) throw ValidationError("expected a permutation solution");
  return *p;
}

double as_scalar(const Solution& s) {
  const auto* x = std::get_if<double>(&s);
  if (!x) throw ValidationError("expected a scalar solution");
  return *x;
}

Permutation shuffled_identity(std::size_t n, RngStream& rng) {
  Permutation perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
  }
  return perm;
}

std::string key_of(const Permutation& perm) {
  std::string key;
  key.reserve(perm.size() * 3);
  for (int v : perm) {
    key += std::to_string(v);
    key += ',';
  }
  return key;
}

}  // namespace

// ---------------------------------------------------------------------------
// TSP

TspProblem::TspProblem(std::vector<City> cities) : cities_(std::move(cities)) {
  if (cities_.size() < 3) throw ValidationError("TSP needs at least 3 cities");
  for (const auto& c : cities_) {
    if (!std::isfinite(c.x) || !std::isfinite(c.y)) {
      throw ValidationError("TSP city coordinates must be finite");
    }
  }
}

TspProblem TspProblem::random(std::size_t n, std::uint64_t seed) {
  RngStream rng(seed, derive_stream_id(StreamPurpose::kProblem, n));
  std::vector<City> cities(n);
  for (auto& c : cities) {
    c.x = rng.uniform();
    c.y = rng.uniform();
  }
  return TspProblem(std::move(cities));
}

double tsp_energy(const Permutation& tour, const std::vector<City>& cities) {
  validate_permutation(tour, cities.size());
  double length = 0;
  for (std::size_t i = 0; i < tour.size(); ++i) {
    const City& a = cities[tour[i]];
    const City& b = cities[tour[(i + 1) % tour.size()]];
    length += std::hypot(a.x - b.x, a.y - b.y);
  }
  return length;
}

Permutation tsp_neighbor(const Permutation& tour, RngStream& rng) {
  const std::size_t n = tour.size();
  // Uniform over the n(n+1)/2 ordered pairs i <= j.
  const std::uint64_t pairs = n * (n + 1) / 2;
  std::uint64_t r = rng.uniform_index(pairs);
  std::size_t i = 0;
  while (r >= n - i) {
    r -= n - i;
    ++i;
  }
  const std::size_t j = i + r;
  Permutation out = tour;
  std::reverse(out.begin() + i, out.begin() + j + 1);
  return out;
}

Permutation canonical_tour(const Permutation& tour) {
  if (tour.empty()) return tour;
  const auto zero = std::find(tour.begin(), tour.end(), 0);
  Permutation fwd(tour.size());
  std::rotate_copy(tour.begin(), zero, tour.end(), fwd.begin());
  Permutation bwd = fwd;
  std::reverse(bwd.begin() + 1, bwd.end());
  return std::min(fwd, bwd);
}

Solution TspProblem::random_solution(RngStream& rng) const {
  return shuffled_identity(cities_.size(), rng);
}

Solution TspProblem::neighbor(const Solution& s, RngStream& rng,
                              double /*temperature_ratio*/) const {
  return tsp_neighbor(as_permutation(s), rng);
}

double TspProblem::energy(const Solution& s) const {
  return tsp_energy(as_permutation(s), cities_);
}

void TspProblem::validate(const Solution& s) const {
  validate_permutation(as_permutation(s), cities_.size());
}

std::string TspProblem::canonical_key(const Solution& s) const {
  validate(s);
  return "tsp:" + key_of(canonical_tour(as_permutation(s)));
}

// ---------------------------------------------------------------------------
// Job shop

std::size_t JobShopInstance::operation_count() const {
  std::size_t n = 0;
  for (const auto& job : jobs) n += job.size();
  return n;
}

void validate_instance(const JobShopInstance& instance) {
  if (instance.machines <= 0) throw ValidationError("job shop needs >= 1 machine");
  if (instance.jobs.empty()) throw ValidationError("job shop needs >= 1 job");
  for (std::size_t j = 0; j < instance.jobs.size(); ++j) {
    const auto& job = instance.jobs[j];
    if (job.empty()) {
      throw ValidationError("job " + std::to_string(j) + " has no operations");
    }
    std::vector<bool> visited(instance.machines, false);
    for (const auto& op : job) {
      if (op.machine < 0 || op.machine >= instance.machines) {
        throw ValidationError("job " + std::to_string(j) +
                              " references machine " +
                              std::to_string(op.machine) + " out of range");
      }
      if (visited[op.machine]) {
        throw ValidationError("job " + std::to_string(j) + " visits machine " +
                              std::to_string(op.machine) + " twice");
      }
      visited[op.machine] = true;
      if (!(op.duration > 0) || !std::isfinite(op.duration)) {
        throw ValidationError("job " + std::to_string(j) +
                              " has a non-positive duration");
      }
    }
  }
}

double jobshop_energy(const Permutation& priority,
                      const JobShopInstance& instance) {
  validate_instance(instance);
  const std::size_t total = instance.operation_count();
  validate_permutation(priority, total);

  // rank[flat op id] = position in the priority list.
  std::vector<std::size_t> rank(total);
  for (std::size_t pos = 0; pos < total; ++pos) rank[priority[pos]] = pos;

  std::vector<std::size_t> first_op(instance.jobs.size());
  for (std::size_t j = 0, acc = 0; j < instance.jobs.size(); ++j) {
    first_op[j] = acc;
    acc += instance.jobs[j].size();
  }

  std::vector<std::size_t> next(instance.jobs.size(), 0);
  std::vector<double> job_ready(instance.jobs.size(), 0.0);
  std::vector<double> machine_ready(instance.machines, 0.0);
  double makespan = 0;

  for (std::size_t scheduled = 0; scheduled < total; ++scheduled) {
    // Non-delay: restrict to ready operations that can start earliest, then
    // take the highest priority among them.
    double earliest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < instance.jobs.size(); ++j) {
      if (next[j] == instance.jobs[j].size()) continue;
      const auto& op = instance.jobs[j][next[j]];
      earliest = std::min(earliest, std::max(job_ready[j], machine_ready[op.machine]));
    }
    std::size_t pick = instance.jobs.size();
    for (std::size_t j = 0; j < instance.jobs.size(); ++j) {
      if (next[j] == instance.jobs[j].size()) continue;
      const auto& op = instance.jobs[j][next[j]];
      if (std::max(job_ready[j], machine_ready[op.machine]) != earliest) continue;
      if (pick == instance.jobs.size() ||
          rank[first_op[j] + next[j]] < rank[first_op[pick] + next[pick]]) {
        pick = j;
      }
    }
    const auto& op = instance.jobs[pick][next[pick]];
    const double end = earliest + op.duration;
    job_ready[pick] = end;
    machine_ready[op.machine] = end;
    makespan = std::max(makespan, end);
    ++next[pick];
  }
  return makespan;
}

JobShopProblem::JobShopProblem(JobShopInstance instance)
    : instance_(std::move(instance)) {
  validate_instance(instance_);
  if (instance_.operation_count() < 2) {
    throw ValidationError("job shop needs >= 2 operations to have a neighborhood");
  }
}

Solution JobShopProblem::random_solution(RngStream& rng) const {
  return shuffled_identity(instance_.operation_count(), rng);
}

// Swap two distinct priority positions.
Solution JobShopProblem::neighbor(const Solution& s, RngStream& rng,
                                  double /*temperature_ratio*/) const {
  Permutation out = as_permutation(s);
  const std::size_t n = out.size();
  const std::size_t i = rng.uniform_index(n);
  std::size_t j = rng.uniform_index(n - 1);
  if (j >= i) ++j;
  std::swap(out[i], out[j]);
  return out;
}

double JobShopProblem::energy(const Solution& s) const {
  return jobshop_energy(as_permutation(s), instance_);
}

void JobShopProblem::validate(const Solution& s) const {
  validate_permutation(as_permutation(s), instance_.operation_count());
}

std::string JobShopProblem::canonical_key(const Solution& s) const {
  validate(s);
  return "jobshop:" + key_of(as_permutation(s));
}

// ---------------------------------------------------------------------------
// Skewed landscape

double skewed_energy(double x) {
  if (!(x >= skewed::kLower && x <= skewed::kUpper)) {
    throw ValidationError("skewed1d point outside [-5, 5]");
  }
  const double dn = x - skewed::kNarrowCenter;
  const double db = x - skewed::kBroadCenter;
  return -skewed::kNarrowDepth *
             std::exp(-dn * dn / (2 * skewed::kNarrowWidth * skewed::kNarrowWidth)) -
         skewed::kBroadDepth *
             std::exp(-db * db / (2 * skewed::kBroadWidth * skewed::kBroadWidth));
}

bool in_global_basin(double x) {
  return std::abs(x - skewed::kNarrowCenter) < skewed::kGlobalBasinRadius;
}

bool in_local_basin(double x) {
  return std::abs(x - skewed::kBroadCenter) < skewed::kLocalBasinRadius;
}

Solution Skewed1dProblem::random_solution(RngStream& rng) const {
  return skewed::kLower + (skewed::kUpper - skewed::kLower) * rng.uniform();
}

Solution Skewed1dProblem::neighbor(const Solution& s, RngStream& rng,
                                   double temperature_ratio) const {
  const double sigma = 0.02 + 0.5 * temperature_ratio;
  return std::clamp(as_scalar(s) + rng.gaussian() * sigma, skewed::kLower,
                    skewed::kUpper);
}

double Skewed1dProblem::energy(const Solution& s) const {
  return skewed_energy(as_scalar(s));
}

void Skewed1dProblem::validate(const Solution& s) const {
  const double x = as_scalar(s);
  if (!(x >= skewed::kLower && x <= skewed::kUpper)) {
    throw ValidationError("skewed1d point outside [-5, 5]");
  }
}

std::string Skewed1dProblem::canonical_key(const Solution& s) const {
  validate(s);
  return "skewed1d:" + std::to_string(std::llround(as_scalar(s) * 1e6));
}

// ---------------------------------------------------------------------------
// Loaders

namespace {

// Reads the next non-blank line; returns false at EOF.
bool next_line(std::istream& in, std::string& line, int& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

[[noreturn]] void fail_at(int line_no, const std::string& what) {
  throw ValidationError("line " + std::to_string(line_no) + ": " + what);
}

void expect_end(std::istringstream& row, int line_no) {
  std::string extra;
  if (row >> extra) fail_at(line_no, "unexpected trailing token '" + extra + "'");
}

}  // namespace

std::vector<City> load_tsp(std::istream& in) {
  std::string line;
  int line_no = 0;
  if (!next_line(in, line, line_no)) fail_at(line_no + 1, "missing city count");
  std::istringstream header(line);
  long long n = 0;
  if (!(header >> n)) fail_at(line_no, "expected city count");
  expect_end(header, line_no);
  if (n < 3) fail_at(line_no, "city count must be >= 3");

  std::vector<City> cities;
  cities.reserve(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) {
    if (!next_line(in, line, line_no)) {
      fail_at(line_no + 1, "expected " + std::to_string(n) + " cities, got " +
                               std::to_string(i));
    }
    std::istringstream row(line);
    City c;
    if (!(row >> c.x >> c.y)) fail_at(line_no, "expected \"x y\"");
    expect_end(row, line_no);
    if (!std::isfinite(c.x) || !std::isfinite(c.y)) fail_at(line_no, "non-finite coordinate");
    cities.push_back(c);
  }
  if (next_line(in, line, line_no)) fail_at(line_no, "extra data after last city");
  return cities;
}

JobShopInstance load_jobshop(std::istream& in) {
  std::string line;
  int line_no = 0;
  if (!next_line(in, line, line_no)) fail_at(line_no + 1, "missing \"J M\" header");
  std::istringstream header(line);
  int jobs = 0, machines = 0;
  if (!(header >> jobs >> machines)) fail_at(line_no, "expected \"J M\"");
  expect_end(header, line_no);
  if (jobs < 1 || machines < 1) fail_at(line_no, "J and M must be >= 1");

  JobShopInstance instance;
  instance.machines = machines;
  for (int j = 0; j < jobs; ++j) {
    if (!next_line(in, line, line_no)) {
      fail_at(line_no + 1, "expected " + std::to_string(jobs) + " job lines");
    }
    std::istringstream row(line);
    std::vector<Operation> ops;
    std::vector<bool> visited(machines, false);
    for (int m = 0; m < machines; ++m) {
      Operation op;
      if (!(row >> op.machine >> op.duration)) {
        fail_at(line_no, "expected " + std::to_string(machines) +
                             " \"machine duration\" pairs");
      }
      if (op.machine < 0 || op.machine >= machines) fail_at(line_no, "machine index out of range");
      if (visited[op.machine]) fail_at(line_no, "machine visited twice by one job");
      if (!(op.duration > 0) || !std::isfinite(op.duration)) fail_at(line_no, "duration must be > 0");
      visited[op.machine] = true;
      ops.push_back(op);
    }
    expect_end(row, line_no);
    instance.jobs.push_back(std::move(ops));
  }
  if (next_line(in, line, line_no)) fail_at(line_no, "extra data after last job");
  return instance;
}

std::vector<City> load_tsp_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open TSP instance '" + path + "'");
  try {
    return load_tsp(in);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

JobShopInstance load_jobshop_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open job-shop instance '" + path + "'");
  try {
    return load_jobshop(in);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Oracle

namespace {

Optimum enumerate_tsp(const TspProblem& tsp) {
  Permutation tour(tsp.size());
  std::iota(tour.begin(), tour.end(), 0);
  Optimum best{tour, tsp_energy(tour, tsp.cities())};
  // City 0 fixed first; both directions are visited, which is harmless.
  while (std::next_permutation(tour.begin() + 1, tour.end())) {
    const double e = tsp_energy(tour, tsp.cities());
    if (e < best.energy) best = {tour, e};
  }
  best.solution = canonical_tour(std::get<Permutation>(best.solution));
  return best;
}

Optimum enumerate_jobshop(const JobShopProblem& js) {
  Permutation prio(js.instance().operation_count());
  std::iota(prio.begin(), prio.end(), 0);
  Optimum best{prio, jobshop_energy(prio, js.instance())};
  while (std::next_permutation(prio.begin(), prio.end())) {
    const double e = jobshop_energy(prio, js.instance());
    if (e < best.energy) best = {prio, e};
  }
  return best;
}

Optimum grid_skewed() {
  const double step = (skewed::kUpper - skewed::kLower) / (kSkewedGridPoints - 1);
  double best_x = skewed::kLower;
  double best_e = skewed_energy(best_x);
  for (std::size_t i = 1; i < kSkewedGridPoints; ++i) {
    const double x = std::min(skewed::kUpper, skewed::kLower + step * i);
    const double e = skewed_energy(x);
    if (e < best_e) {
      best_e = e;
      best_x = x;
    }
  }
  // Golden-section refinement inside the bracketing cell pair.
  double lo = std::max(skewed::kLower, best_x - step);
  double hi = std::min(skewed::kUpper, best_x + step);
  const double inv_phi = (std::sqrt(5.0) - 1) / 2;
  double a = hi - inv_phi * (hi - lo), b = lo + inv_phi * (hi - lo);
  double fa = skewed_energy(a), fb = skewed_energy(b);
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - inv_phi * (hi - lo);
      fa = skewed_energy(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + inv_phi * (hi - lo);
      fb = skewed_energy(b);
    }
  }
  const double x = (lo + hi) / 2;
  const double e = skewed_energy(x);
  if (e < best_e) return {x, e};
  return {best_x, best_e};
}

}  // namespace

Optimum brute_force_optimum(const Problem& problem) {
  switch (problem.kind()) {
    case ProblemKind::kTsp: {
      const auto& tsp = static_cast<const TspProblem&>(problem);
      if (tsp.size() > kMaxOracleCities) {
        throw RuntimeFailure("oracle refuses TSP with " + std::to_string(tsp.size()) +
                             " cities (cap " + std::to_string(kMaxOracleCities) + ")");
      }
      return enumerate_tsp(tsp);
    }
    case ProblemKind::kJobShop: {
      const auto& js = static_cast<const JobShopProblem&>(problem);
      if (js.instance().operation_count() > kMaxOracleOperations) {
        throw RuntimeFailure("oracle refuses job shop with " +
                             std::to_string(js.instance().operation_count()) +
                             " operations (cap " + std::to_string(kMaxOracleOperations) + ")");
      }
      return enumerate_jobshop(js);
    }
    case ProblemKind::kSkewed1d:
      return grid_skewed();
  }
  throw StateError("unknown problem kind");
}

}  // namespace dsa
