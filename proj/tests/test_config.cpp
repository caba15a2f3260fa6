#include <algorithm>

#include "doctest.h"
#include "dsa/config.hpp"

using namespace dsa;

namespace {

std::vector<std::string> issues_of(const std::string& text) {
  try {
    parse_config_text(text, DSA_CONFIG_DIR);
  } catch (const ConfigError& e) {
    return e.issues();
  }
  return {};
}

bool has_issue(const std::vector<std::string>& issues, const std::string& prefix) {
  return std::any_of(issues.begin(), issues.end(),
                     [&](const std::string& s) { return s.rfind(prefix, 0) == 0; });
}

}  // namespace

TEST_CASE("empty config takes the defaults") {
  const auto c = parse_config_text("{}");
  CHECK(c.problem.kind == ProblemKind::kTsp);
  CHECK(c.params.k == 1.0);
  CHECK(c.params.t_low == 1e-3);
  CHECK(c.params.p_e0 == 0.8);
  CHECK(c.params.alpha == 0.95);
  CHECK(c.params.steps_per_temperature == 50);
  CHECK(c.warmup_steps == 500);
  CHECK_FALSE(c.t0_given);
  CHECK(c.cluster.n_searchers == 1);
  CHECK(c.cluster.broadcast);
  CHECK_FALSE(c.tolerance.any());
  CHECK(c.scenario.empty());
  CHECK(c.output.format == "csv");
}

TEST_CASE("full config round trip") {
  const auto c = parse_config_text(R"({
    "problem": {"kind": "skewed1d"},
    "anneal": {"t0": 2.5, "alpha": 0.9, "steps_per_temperature": 20},
    "cluster": {"searchers": 6, "standby": 2, "broadcast": false,
                "fabric": {"base_delay": 2, "jitter": 3, "loss_probability": 0.1}},
    "faults": {"crashes": [{"node": 7, "tick": 30}]},
    "tolerance": {"strategies": ["HOT_STANDBY", "GRADIENT_GUARD"], "sanction": "temp_reset"},
    "seed": 9, "seeds": 20, "threads": 4,
    "output": {"dir": "x", "format": "json"}
  })");
  CHECK(c.problem.kind == ProblemKind::kSkewed1d);
  CHECK(c.t0_given);
  CHECK(c.params.t0 == 2.5);
  CHECK(c.params.alpha == 0.9);
  CHECK(c.cluster.n_searchers == 6);
  CHECK(c.cluster.n_standby == 2);
  CHECK_FALSE(c.cluster.broadcast);
  CHECK(c.cluster.fabric.jitter == 3);
  CHECK(c.scenario.crashes.size() == 1);
  CHECK(c.tolerance.hot_standby);
  CHECK(c.tolerance.gradient_guard);
  CHECK_FALSE(c.tolerance.hybrid_replication);
  CHECK(c.tolerance.sanction == SanctionPolicy::kTempReset);
  CHECK(c.seeds == 20);
  CHECK(c.output.format == "json");
}

TEST_CASE("range errors name their key") {
  CHECK(has_issue(issues_of(R"({"cluster": {"fabric": {"loss_probability": 1.0}}})"),
                  "cluster.fabric.loss_probability:"));
  CHECK(has_issue(issues_of(R"({"anneal": {"alpha": 0}})"), "anneal.alpha:"));
  CHECK(has_issue(issues_of(R"({"anneal": {"p_e0": 1}})"), "anneal.p_e0:"));
  CHECK(has_issue(issues_of(R"({"cluster": {"searchers": 0}})"), "cluster.searchers:"));
  CHECK(has_issue(issues_of(R"({"tolerance": {"theta": 1.5}})"), "tolerance.theta:"));
}

TEST_CASE("unknown keys and bad values are all reported together") {
  const auto issues = issues_of(R"({"bogus": 1, "anneal": {"alpha": 2, "typo": 3},
                                    "output": {"format": "xml"}})");
  CHECK(has_issue(issues, "bogus:"));
  CHECK(has_issue(issues, "anneal.typo:"));
  CHECK(has_issue(issues, "anneal.alpha:"));
  CHECK(has_issue(issues, "output.format:"));
  CHECK(issues.size() >= 4);
}

TEST_CASE("fault entries are checked against the cluster") {
  CHECK_FALSE(issues_of(R"({"cluster": {"searchers": 2},
                            "faults": {"crashes": [{"node": 2, "tick": 5}]}})").empty());
  CHECK_FALSE(issues_of(R"({"budget_ticks": 10,
                            "faults": {"crashes": [{"node": 0, "tick": 50}]}})").empty());
  CHECK_FALSE(issues_of(R"({"cluster": {"searchers": 2},
      "faults": {"eccentric": [{"node": 0, "kind": "LYING", "start_tick": 3}]}})").empty());
  CHECK_FALSE(issues_of(R"({"cluster": {"searchers": 2},
      "faults": {"eccentric": [{"node": 0, "kind": "UNDERREPORT", "start_tick": 0}]}})").empty());
}

TEST_CASE("malformed json and missing files") {
  CHECK_THROWS_AS(parse_config_text("{not json"), ValidationError);
  CHECK_THROWS_AS(parse_config_text("[1, 2]"), ValidationError);
  CHECK_THROWS_AS(parse_config("/nonexistent/config.json"), ValidationError);
  CHECK_THROWS_AS(parse_config_text(R"({"problem": {"instance": "missing.tsp"}})"),
                  ValidationError);
}

TEST_CASE("shipped configs load") {
  for (const char* name : {"tsp8", "skewed1d", "crash_recovery", "eccentric", "jobshop",
                           "mapreduce"}) {
    CAPTURE(name);
    const auto c = parse_config(std::string(DSA_CONFIG_DIR) + "/" + name + ".json");
    CHECK_NOTHROW(make_problem(c.problem));
  }
  const auto crash = parse_config(DSA_CONFIG_DIR "/crash_recovery.json");
  CHECK(crash.scenario.crashes.size() == 2);
  CHECK(crash.scenario.loss_probability == 0.05);
  CHECK(crash.problem.instance_path);
}

TEST_CASE("scenario text") {
  const auto s = parse_scenario_text(R"({"random_crashes": {"count": 2, "min_tick": 5, "max_tick": 9},
                                         "extra_delay": 3})");
  REQUIRE(s.random_crashes);
  CHECK(s.random_crashes->count == 2);
  CHECK(s.extra_delay == 3);
  CHECK_THROWS_AS(load_scenario_file("/nonexistent.json"), ValidationError);
}
