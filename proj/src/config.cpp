#include "dsa/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace dsa {

namespace {

using nlohmann::json;

std::string join(const std::vector<std::string>& issues) {
  std::string out = "invalid configuration";
  for (const auto& i : issues) out += "\n  " + i;
  return out;
}

const json& empty_object() {
  static const json empty = json::object();
  return empty;
}

// Walks one JSON object and records problems with their key path. Nothing
// throws until the caller collects the issues.
class Reader {
 public:
  Reader(std::vector<std::string>& issues, std::string path, const json& obj)
      : issues_(&issues), path_(std::move(path)), obj_(&obj) {
    if (!obj_->is_object()) issue("", "expected an object");
  }

  bool has(const std::string& key) const {
    return obj_->is_object() && obj_->contains(key) && !obj_->at(key).is_null();
  }

  const json* raw(const std::string& key) const {
    used_.insert(key);
    if (!has(key)) return nullptr;
    return &obj_->at(key);
  }

  Reader child(const std::string& key) const {
    const json* v = raw(key);
    return Reader(*issues_, at(key), v ? *v : empty_object());
  }

  Reader element(const std::string& key, std::size_t i, const json& v) const {
    return Reader(*issues_, at(key) + "[" + std::to_string(i) + "]", v);
  }

  template <class T>
  bool number(const std::string& key, T& out) const {
    const json* v = raw(key);
    if (!v) return false;
    if constexpr (std::is_integral_v<T>) {
      if (!v->is_number_integer() || (std::is_unsigned_v<T> && v->is_number_integer() &&
                                      !v->is_number_unsigned() && v->get<long long>() < 0)) {
        issue(key, std::is_unsigned_v<T> ? "expected a non-negative integer"
                                         : "expected an integer");
        return false;
      }
      out = v->get<T>();
    } else {
      if (!v->is_number()) {
        issue(key, "expected a number");
        return false;
      }
      out = v->get<T>();
    }
    return true;
  }

  bool boolean(const std::string& key, bool& out) const {
    const json* v = raw(key);
    if (!v) return false;
    if (!v->is_boolean()) {
      issue(key, "expected true or false");
      return false;
    }
    out = v->get<bool>();
    return true;
  }

  bool text(const std::string& key, std::string& out) const {
    const json* v = raw(key);
    if (!v) return false;
    if (!v->is_string()) {
      issue(key, "expected a string");
      return false;
    }
    out = v->get<std::string>();
    return true;
  }

  void check(bool ok, const std::string& key, const std::string& what) const {
    if (!ok) issue(key, what);
  }

  void issue(const std::string& key, const std::string& what) const {
    std::string where = key.empty() ? path_ : at(key);
    if (where.empty()) where = "<root>";
    issues_->push_back(where + ": " + what);
  }

  void finish() const {
    if (!obj_->is_object()) return;
    for (const auto& item : obj_->items()) {
      if (!used_.count(item.key())) issue(item.key(), "unknown key");
    }
  }

  std::string at(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  std::vector<std::string>* issues_;
  std::string path_;
  const json* obj_;
  mutable std::set<std::string> used_;
};

std::string resolve(const std::string& base_dir, const std::string& p) {
  const std::filesystem::path path(p);
  if (path.is_absolute()) return p;
  return (std::filesystem::path(base_dir) / path).lexically_normal().string();
}

std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(std::string("cannot open ") + what + " '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({where + ": malformed JSON: " + e.what()});
  }
}

bool probability_ok(double p) { return p >= 0 && p < 1; }

void read_scenario(const Reader& r, FaultScenario& s) {
  if (const json* crashes = r.raw("crashes")) {
    if (!crashes->is_array()) {
      r.issue("crashes", "expected an array");
    } else {
      std::set<int> seen;
      for (std::size_t i = 0; i < crashes->size(); ++i) {
        const Reader c = r.element("crashes", i, (*crashes)[i]);
        CrashSpec spec;
        c.check(c.number("node", spec.node), "node", "required");
        c.check(c.number("tick", spec.tick), "tick", "required");
        c.check(spec.node >= 0, "node", "must be >= 0");
        c.check(spec.tick >= 1, "tick", "must be >= 1");
        c.check(seen.insert(spec.node).second, "node", "node crashes twice");
        c.finish();
        s.crashes.push_back(spec);
      }
    }
  }
  if (r.has("random_crashes")) {
    const Reader rc = r.child("random_crashes");
    RandomCrashSpec spec;
    rc.number("count", spec.count);
    rc.number("min_tick", spec.min_tick);
    rc.number("max_tick", spec.max_tick);
    rc.check(spec.min_tick >= 1, "min_tick", "must be >= 1");
    rc.check(spec.max_tick >= spec.min_tick, "max_tick", "must be >= min_tick");
    rc.finish();
    s.random_crashes = spec;
  } else {
    r.raw("random_crashes");
  }
  double p = 0;
  if (r.number("loss_probability", p)) {
    r.check(probability_ok(p), "loss_probability", "must lie in [0, 1)");
    s.loss_probability = p;
  }
  if (r.number("corruption_probability", p)) {
    r.check(probability_ok(p), "corruption_probability", "must lie in [0, 1)");
    s.corruption_probability = p;
  }
  r.number("extra_delay", s.extra_delay);
  if (const json* ecc = r.raw("eccentric")) {
    if (!ecc->is_array()) {
      r.issue("eccentric", "expected an array");
    } else {
      for (std::size_t i = 0; i < ecc->size(); ++i) {
        const Reader e = r.element("eccentric", i, (*ecc)[i]);
        EccentricSpec spec;
        std::string kind;
        e.check(e.number("node", spec.node), "node", "required");
        if (e.text("kind", kind)) {
          try {
            spec.kind = eccentric_kind_from_string(kind);
          } catch (const ValidationError& err) {
            e.issue("kind", err.what());
          }
        } else {
          e.issue("kind", "required");
        }
        e.number("start_tick", spec.start_tick);
        e.check(spec.start_tick >= 1, "start_tick", "must be >= 1");
        std::uint64_t end = 0;
        if (e.number("end_tick", end)) {
          e.check(end > spec.start_tick, "end_tick", "must follow start_tick");
          spec.end_tick = end;
        }
        e.number("factor", spec.factor);
        e.check(spec.factor > 0 && spec.factor < 1, "factor", "must lie in (0, 1)");
        double delta = 0;
        if (e.number("delta", delta)) {
          e.check(delta > 0, "delta", "must be > 0");
          spec.delta = delta;
        }
        e.finish();
        s.eccentric.push_back(spec);
      }
    }
  }
  r.finish();
}

std::vector<City> read_cities(const Reader& r, const json& arr) {
  std::vector<City> cities;
  if (!arr.is_array()) {
    r.issue("cities", "expected an array of [x, y]");
    return cities;
  }
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const json& c = arr[i];
    if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number()) {
      r.issue("cities", "entry " + std::to_string(i) + " is not [x, y]");
      continue;
    }
    cities.push_back({c[0].get<double>(), c[1].get<double>()});
  }
  r.check(cities.size() >= 3, "cities", "need at least 3 cities");
  return cities;
}

JobShopInstance read_jobs(const Reader& r, const json& arr, int machines) {
  JobShopInstance inst;
  inst.machines = machines;
  if (!arr.is_array()) {
    r.issue("jobs", "expected an array of jobs");
    return inst;
  }
  for (std::size_t j = 0; j < arr.size(); ++j) {
    std::vector<Operation> ops;
    if (!arr[j].is_array()) {
      r.issue("jobs", "job " + std::to_string(j) + " is not an array");
      continue;
    }
    for (const auto& op : arr[j]) {
      if (!op.is_array() || op.size() != 2 || !op[0].is_number_integer() || !op[1].is_number()) {
        r.issue("jobs", "job " + std::to_string(j) + " has an entry that is not [machine, duration]");
        continue;
      }
      ops.push_back({op[0].get<int>(), op[1].get<double>()});
    }
    inst.jobs.push_back(std::move(ops));
  }
  try {
    validate_instance(inst);
  } catch (const ValidationError& e) {
    r.issue("jobs", e.what());
  }
  return inst;
}

void read_problem(const Reader& r, ProblemSpec& spec, const std::string& base_dir) {
  std::string kind = "tsp";
  r.text("kind", kind);
  try {
    spec.kind = problem_kind_from_string(kind);
  } catch (const ValidationError& e) {
    r.issue("kind", e.what());
  }
  std::string instance;
  if (r.text("instance", instance)) {
    spec.instance_path = resolve(base_dir, instance);
    if (!std::filesystem::exists(*spec.instance_path)) {
      r.issue("instance", "file '" + *spec.instance_path + "' does not exist");
    }
  }
  if (const json* cities = r.raw("cities")) spec.cities = read_cities(r, *cities);
  int machines = 0;
  r.number("machines", machines);
  if (const json* jobs = r.raw("jobs")) {
    r.check(machines >= 1, "machines", "required (>= 1) with inline jobs");
    spec.jobshop = read_jobs(r, *jobs, machines);
  }
  if (r.has("random")) {
    const Reader g = r.child("random");
    g.number("n", spec.random_n);
    g.number("seed", spec.random_seed);
    g.check(spec.random_n >= 3, "n", "must be >= 3");
    g.finish();
  } else {
    r.raw("random");
  }
  if (spec.kind == ProblemKind::kJobShop && !spec.instance_path && !spec.jobshop) {
    r.issue("", "job shop needs 'instance' or inline 'jobs'");
  }
  r.finish();
}

void read_anneal(const Reader& r, ExperimentConfig& c) {
  AnnealParams& p = c.params;
  r.number("k", p.k);
  c.t0_given = r.number("t0", p.t0);
  r.number("t_low", p.t_low);
  r.number("p_e0", p.p_e0);
  r.number("alpha", p.alpha);
  r.number("steps_per_temperature", p.steps_per_temperature);
  r.number("warmup_steps", c.warmup_steps);
  r.check(p.k > 0, "k", "must be > 0");
  r.check(p.t_low > 0, "t_low", "must be > 0");
  if (c.t0_given) r.check(p.t0 > p.t_low, "t0", "must exceed t_low");
  r.check(p.p_e0 > 0 && p.p_e0 < 1, "p_e0", "must lie in (0, 1)");
  r.check(p.alpha > 0 && p.alpha < 1, "alpha", "must lie in (0, 1)");
  r.check(p.steps_per_temperature >= 1, "steps_per_temperature", "must be >= 1");
  r.check(c.warmup_steps >= 10, "warmup_steps", "must be >= 10");
  r.finish();
}

void read_fabric(const Reader& r, FabricConfig& f) {
  r.number("base_delay", f.base_delay);
  r.number("jitter", f.jitter);
  r.number("loss_probability", f.loss_probability);
  r.number("corruption_probability", f.corruption_probability);
  r.number("per_message_cost", f.per_message_cost);
  r.check(probability_ok(f.loss_probability), "loss_probability", "must lie in [0, 1)");
  r.check(probability_ok(f.corruption_probability), "corruption_probability",
          "must lie in [0, 1)");
  r.check(f.per_message_cost >= 0, "per_message_cost", "must be >= 0");
  r.finish();
}

void read_cluster(const Reader& r, ClusterConfig& c) {
  r.number("searchers", c.n_searchers);
  r.number("standby", c.n_standby);
  r.boolean("broadcast", c.broadcast);
  r.number("adoption_beta", c.adoption_beta);
  r.number("heartbeat_period", c.heartbeat_period);
  r.number("missed_heartbeats", c.missed_heartbeats);
  r.check(c.n_searchers >= 1, "searchers", "must be >= 1");
  r.check(c.n_standby >= 0, "standby", "must be >= 0");
  r.check(c.adoption_beta >= 0 && c.adoption_beta <= 1, "adoption_beta", "must lie in [0, 1]");
  r.check(c.heartbeat_period >= 1, "heartbeat_period", "must be >= 1");
  r.check(c.missed_heartbeats >= 1, "missed_heartbeats", "must be >= 1");
  read_fabric(r.child("fabric"), c.fabric);
  r.finish();
}

void read_tolerance(const Reader& r, ToleranceConfig& t) {
  if (const json* strategies = r.raw("strategies")) {
    if (!strategies->is_array()) {
      r.issue("strategies", "expected an array");
    } else {
      for (const auto& s : *strategies) {
        const std::string name = s.is_string() ? s.get<std::string>() : "";
        if (name == "HOT_STANDBY") {
          t.hot_standby = true;
        } else if (name == "HYBRID_REPLICATION") {
          t.hybrid_replication = true;
        } else if (name == "GRADIENT_GUARD") {
          t.gradient_guard = true;
        } else {
          r.issue("strategies", "unknown strategy '" + (name.empty() ? s.dump() : name) + "'");
        }
      }
    }
  }
  r.number("theta", t.theta);
  r.number("rho", t.rho);
  r.number("guard_window", t.guard_window);
  r.number("eps", t.eps);
  std::string sanction;
  if (r.text("sanction", sanction)) {
    if (sanction == "auto") {
      t.sanction = SanctionPolicy::kAuto;
    } else if (sanction == "quarantine") {
      t.sanction = SanctionPolicy::kQuarantine;
    } else if (sanction == "temp_reset") {
      t.sanction = SanctionPolicy::kTempReset;
    } else {
      r.issue("sanction", "expected auto, quarantine or temp_reset");
    }
  }
  r.check(t.theta > 0 && t.theta < 1, "theta", "must lie in (0, 1)");
  r.check(t.rho > 0 && t.rho < 1, "rho", "must lie in (0, 1)");
  r.check(t.guard_window >= 1, "guard_window", "must be >= 1");
  r.check(t.eps >= 0, "eps", "must be >= 0");
  r.finish();
}

void read_mapreduce(const Reader& r, MapReduceSpec& m) {
  r.number("tasks", m.tasks);
  r.number("budget", m.budget);
  r.number("threads", m.threads);
  r.number("corrupt_fraction", m.corrupt_fraction);
  r.check(m.tasks >= 1, "tasks", "must be >= 1");
  r.check(m.budget >= 1, "budget", "must be >= 1");
  r.check(m.corrupt_fraction >= 0 && m.corrupt_fraction <= 1, "corrupt_fraction",
          "must lie in [0, 1]");
  if (const json* list = r.raw("task_list")) {
    if (!list->is_array()) {
      r.issue("task_list", "expected an array");
    } else {
      std::set<std::uint64_t> ids;
      for (std::size_t i = 0; i < list->size(); ++i) {
        const Reader t = r.element("task_list", i, (*list)[i]);
        TaskSpec spec;
        spec.budget = m.budget;
        t.check(t.number("id", spec.id), "id", "required");
        t.check(t.number("seed", spec.seed), "seed", "required");
        t.number("budget", spec.budget);
        t.check(spec.budget >= 1, "budget", "must be >= 1");
        t.check(ids.insert(spec.id).second, "id", "duplicate task id");
        t.finish();
        m.task_list.push_back(spec);
      }
    }
  }
  r.finish();
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> issues)
    : ValidationError(join(issues)), issues_(std::move(issues)) {}

ProblemPtr make_problem(const ProblemSpec& spec) {
  switch (spec.kind) {
    case ProblemKind::kTsp:
      if (spec.instance_path) return std::make_shared<TspProblem>(load_tsp_file(*spec.instance_path));
      if (!spec.cities.empty()) return std::make_shared<TspProblem>(spec.cities);
      return std::make_shared<TspProblem>(TspProblem::random(spec.random_n, spec.random_seed));
    case ProblemKind::kJobShop:
      if (spec.instance_path) {
        return std::make_shared<JobShopProblem>(load_jobshop_file(*spec.instance_path));
      }
      if (spec.jobshop) return std::make_shared<JobShopProblem>(*spec.jobshop);
      throw ValidationError("job shop needs an instance");
    case ProblemKind::kSkewed1d:
      return std::make_shared<Skewed1dProblem>();
  }
  throw ValidationError("unknown problem kind");
}

FaultScenario parse_scenario_text(const std::string& text) {
  const json doc = parse_json(text, "scenario");
  std::vector<std::string> issues;
  FaultScenario s;
  read_scenario(Reader(issues, "", doc), s);
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return s;
}

FaultScenario load_scenario_file(const std::string& path) {
  try {
    return parse_scenario_text(read_file(path, "scenario"));
  } catch (const ConfigError& e) {
    auto issues = e.issues();
    for (auto& i : issues) i = path + ": " + i;
    throw ConfigError(std::move(issues));
  }
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& base_dir) {
  const json doc = parse_json(text, "<root>");
  std::vector<std::string> issues;
  ExperimentConfig c;
  const Reader root(issues, "", doc);

  read_problem(root.child("problem"), c.problem, base_dir);
  read_anneal(root.child("anneal"), c);
  c.cluster.params = c.params;
  read_cluster(root.child("cluster"), c.cluster);

  if (const json* faults = root.raw("faults")) {
    if (faults->is_string()) {
      const std::string path = resolve(base_dir, faults->get<std::string>());
      try {
        c.scenario = load_scenario_file(path);
      } catch (const ConfigError& e) {
        for (const auto& i : e.issues()) issues.push_back("faults: " + i);
      } catch (const ValidationError& e) {
        issues.push_back(std::string("faults: ") + e.what());
      }
    } else {
      read_scenario(root.child("faults"), c.scenario);
    }
  }
  const int nodes = c.cluster.n_searchers + c.cluster.n_standby;
  for (const auto& crash : c.scenario.crashes) {
    if (crash.node >= nodes) {
      issues.push_back("faults.crashes: node " + std::to_string(crash.node) +
                       " is outside the cluster");
    }
  }
  for (const auto& e : c.scenario.eccentric) {
    if (e.node >= c.cluster.n_searchers || e.node < 0) {
      issues.push_back("faults.eccentric: node " + std::to_string(e.node) +
                       " is not a searcher");
    }
  }

  read_tolerance(root.child("tolerance"), c.tolerance);

  root.number("seed", c.seed);
  root.number("seeds", c.seeds);
  root.number("budget_ticks", c.budget_ticks);
  root.number("threads", c.threads);
  root.check(c.seeds >= 1, "seeds", "must be >= 1");
  root.check(c.budget_ticks >= 1, "budget_ticks", "must be >= 1");
  for (const auto& crash : c.scenario.crashes) {
    if (crash.tick > c.budget_ticks) {
      issues.push_back("faults.crashes: tick " + std::to_string(crash.tick) +
                       " is beyond budget_ticks");
    }
  }

  {
    const Reader a = root.child("amdahl");
    double p = 0;
    if (a.number("parallel_fraction", p)) {
      a.check(p >= 0 && p <= 1, "parallel_fraction", "must lie in [0, 1]");
      c.amdahl.parallel_fraction = p;
    }
    std::string reading;
    if (a.text("reading", reading)) {
      if (reading == "p") {
        c.amdahl.reading = FractionReading::kParallel;
      } else if (reading == "one_minus_p") {
        c.amdahl.reading = FractionReading::kSerial;
      } else {
        a.issue("reading", "expected p or one_minus_p");
      }
    }
    a.finish();
  }
  {
    const Reader o = root.child("output");
    o.text("dir", c.output.dir);
    o.text("format", c.output.format);
    o.check(c.output.format == "csv" || c.output.format == "json", "format",
            "expected csv or json");
    o.finish();
  }
  read_mapreduce(root.child("mapreduce"), c.mapreduce);
  root.finish();

  if (!issues.empty()) throw ConfigError(std::move(issues));
  return c;
}

ExperimentConfig parse_config(const std::string& path) {
  const std::string text = read_file(path, "config");
  const std::string base = std::filesystem::path(path).parent_path().string();
  return parse_config_text(text, base.empty() ? "." : base);
}

}  // namespace dsa
