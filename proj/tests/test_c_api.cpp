// Exercises the shared library through its C header only.
#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "dsa/dsa.h"

namespace {

const std::string kConfigs = DSA_CONFIG_DIR;

struct ConfigHandle {
  dsa_config* ptr = nullptr;
  ~ConfigHandle() { dsa_config_free(ptr); }
};

struct ResultHandle {
  dsa_result* ptr = nullptr;
  ~ResultHandle() { dsa_result_free(ptr); }
};

}  // namespace

TEST_CASE("version and error slot") {
  CHECK(std::string(dsa_version()) == "1.0.0");
  ConfigHandle c;
  CHECK(dsa_config_parse("{nope", nullptr, &c.ptr) == DSA_ERR_VALIDATION);
  CHECK(c.ptr == nullptr);
  CHECK(std::strlen(dsa_last_error()) > 0);
}

TEST_CASE("null arguments") {
  dsa_config* c = nullptr;
  dsa_result* r = nullptr;
  double x = 0;
  CHECK(dsa_config_load(nullptr, &c) == DSA_ERR_INVALID_ARGUMENT);
  CHECK(dsa_config_parse("{}", nullptr, nullptr) == DSA_ERR_INVALID_ARGUMENT);
  CHECK(dsa_config_set_seed(nullptr, 1) == DSA_ERR_INVALID_ARGUMENT);
  CHECK(dsa_run(nullptr, 0, &r) == DSA_ERR_INVALID_ARGUMENT);
  CHECK(dsa_result_energy(nullptr, &x) == DSA_ERR_INVALID_ARGUMENT);
  CHECK(dsa_result_json(nullptr) == nullptr);
  dsa_config_free(nullptr);
  dsa_result_free(nullptr);
}

TEST_CASE("validation errors carry the key path") {
  ConfigHandle c;
  CHECK(dsa_config_parse(R"({"anneal": {"alpha": 0}})", nullptr, &c.ptr) == DSA_ERR_VALIDATION);
  CHECK(std::string(dsa_last_error()).find("anneal.alpha") != std::string::npos);
  CHECK(dsa_config_load("/nonexistent.json", &c.ptr) == DSA_ERR_VALIDATION);
}

TEST_CASE("run through the C API") {
  ConfigHandle c;
  REQUIRE(dsa_config_load((kConfigs + "/tsp8.json").c_str(), &c.ptr) == DSA_OK);
  CHECK(dsa_config_set_output(c.ptr, nullptr, "xml") == DSA_ERR_INVALID_ARGUMENT);
  const auto dir = std::filesystem::temp_directory_path() / "dsa_c_api_run";
  std::filesystem::remove_all(dir);
  REQUIRE(dsa_config_set_output(c.ptr, dir.string().c_str(), "json") == DSA_OK);

  ResultHandle a, b;
  REQUIRE(dsa_run(c.ptr, 1, &a.ptr) == DSA_OK);
  REQUIRE(dsa_run(c.ptr, 0, &b.ptr) == DSA_OK);
  CHECK(std::string(dsa_result_json(a.ptr)) == std::string(dsa_result_json(b.ptr)));
  CHECK(std::filesystem::exists(dir / "trace.json"));
  CHECK(std::filesystem::exists(dir / "report.json"));
  double e = 0;
  REQUIRE(dsa_result_energy(a.ptr, &e) == DSA_OK);
  CHECK(e >= 2.8762560470907874 - 1e-12);
  std::filesystem::remove_all(dir);

  ResultHandle other;
  REQUIRE(dsa_config_set_seed(c.ptr, 2) == DSA_OK);
  REQUIRE(dsa_run(c.ptr, 0, &other.ptr) == DSA_OK);
  CHECK(std::string(dsa_result_json(other.ptr)).find("\"seed\": 2") != std::string::npos);
}

TEST_CASE("sweep, verify and oracle") {
  ConfigHandle c;
  REQUIRE(dsa_config_load((kConfigs + "/tsp8.json").c_str(), &c.ptr) == DSA_OK);
  ResultHandle sweep;
  REQUIRE(dsa_sweep(c.ptr, 3, 0, &sweep.ptr) == DSA_OK);
  CHECK(std::string(dsa_result_json(sweep.ptr)).find("\"runs\"") != std::string::npos);

  ResultHandle oracle;
  REQUIRE(dsa_oracle(c.ptr, 0, &oracle.ptr) == DSA_OK);
  double e = 0;
  REQUIRE(dsa_result_energy(oracle.ptr, &e) == DSA_OK);
  CHECK(std::abs(e - 2.8762560470907874) < 1e-12);

  ConfigHandle mr;
  REQUIRE(dsa_config_load((kConfigs + "/mapreduce.json").c_str(), &mr.ptr) == DSA_OK);
  ResultHandle verify;
  REQUIRE(dsa_verify(mr.ptr, 0, &verify.ptr) == DSA_OK);
  CHECK(dsa_result_energy(verify.ptr, &e) == DSA_OK);

  ConfigHandle js;
  REQUIRE(dsa_config_load((kConfigs + "/jobshop.json").c_str(), &js.ptr) == DSA_OK);
  ResultHandle refused;
  CHECK(dsa_oracle(js.ptr, 0, &refused.ptr) == DSA_ERR_RUNTIME);
  CHECK(refused.ptr == nullptr);
}

TEST_CASE("degenerate landscape is a runtime error") {
  ConfigHandle c;
  REQUIRE(dsa_config_parse(R"({"problem": {"kind": "jobshop", "instance": "instances/toy2x2.jsp"}})",
                           DSA_CONFIG_DIR, &c.ptr) == DSA_OK);
  ResultHandle r;
  CHECK(dsa_run(c.ptr, 0, &r.ptr) == DSA_ERR_RUNTIME);
  CHECK(std::string(dsa_last_error()).find("degenerate") != std::string::npos);
}

TEST_CASE("numeric helpers") {
  double x = 0;
  REQUIRE(dsa_amdahl_speedup(0.9, 8, &x) == DSA_OK);
  CHECK(std::abs(x - 4.705882352941177) < 1e-15);
  CHECK(dsa_amdahl_speedup(1.5, 8, &x) == DSA_ERR_INVALID_ARGUMENT);
  REQUIRE(dsa_boltzmann_probability(1, 1, 1, &x) == DSA_OK);
  CHECK(std::abs(x - 0.36787944117144233) < 1e-15);
  CHECK(dsa_boltzmann_probability(1, 0, 1, &x) == DSA_ERR_INVALID_ARGUMENT);
  CHECK(dsa_boltzmann_probability(1, 1, 1, nullptr) == DSA_ERR_INVALID_ARGUMENT);
}
