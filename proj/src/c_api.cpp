#include "dsa/dsa.h"

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "dsa/experiment.hpp"

struct dsa_config {
  dsa::ExperimentConfig config;
};

struct dsa_result {
  std::string json;
  std::optional<double> energy;
};

namespace {

thread_local std::string last_error;

dsa_status fail(dsa_status status, const std::string& message) {
  last_error = message;
  return status;
}

template <class F>
dsa_status guarded(F&& body) {
  try {
    return body();
  } catch (const dsa::ParameterError& e) {
    return fail(DSA_ERR_INVALID_ARGUMENT, e.what());
  } catch (const dsa::ValidationError& e) {
    return fail(DSA_ERR_VALIDATION, e.what());
  } catch (const std::bad_alloc&) {
    return fail(DSA_ERR_RUNTIME, "out of memory");
  } catch (const std::exception& e) {
    return fail(DSA_ERR_RUNTIME, e.what());
  }
}

// Config-derived numeric errors surface as validation failures rather than
// caller mistakes.
template <class F>
dsa_status guarded_run(F&& body) {
  const dsa_status s = guarded(std::forward<F>(body));
  return s == DSA_ERR_INVALID_ARGUMENT ? DSA_ERR_VALIDATION : s;
}

void write_text(const std::string& dir, const char* name, const std::string& text) {
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) / name;
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw dsa::RuntimeFailure("cannot write '" + path.string() + "'");
}

}  // namespace

extern "C" {

const char* dsa_version(void) { return "1.0.0"; }

const char* dsa_last_error(void) { return last_error.c_str(); }

dsa_status dsa_config_load(const char* path, dsa_config** out) {
  if (!path || !out) return fail(DSA_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded_run([&] {
    *out = new dsa_config{dsa::parse_config(path)};
    return DSA_OK;
  });
}

dsa_status dsa_config_parse(const char* json_text, const char* base_dir, dsa_config** out) {
  if (!json_text || !out) return fail(DSA_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded_run([&] {
    *out = new dsa_config{dsa::parse_config_text(json_text, base_dir ? base_dir : ".")};
    return DSA_OK;
  });
}

dsa_status dsa_config_set_seed(dsa_config* config, uint64_t seed) {
  if (!config) return fail(DSA_ERR_INVALID_ARGUMENT, "null config");
  config->config.seed = seed;
  return DSA_OK;
}

dsa_status dsa_config_set_output(dsa_config* config, const char* dir, const char* format) {
  if (!config) return fail(DSA_ERR_INVALID_ARGUMENT, "null config");
  if (format) {
    const std::string f = format;
    if (f != "csv" && f != "json") {
      return fail(DSA_ERR_INVALID_ARGUMENT, "format must be csv or json, got '" + f + "'");
    }
    config->config.output.format = f;
  }
  if (dir) config->config.output.dir = dir;
  return DSA_OK;
}

void dsa_config_free(dsa_config* config) { delete config; }

dsa_status dsa_run(const dsa_config* config, int write_outputs, dsa_result** out) {
  if (!config || !out) return fail(DSA_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded_run([&] {
    const auto& c = config->config;
    const auto result = dsa::run_experiment(c);
    if (write_outputs) {
      dsa::emit_outputs(result.report, result.trace, c.output.dir, c.output.format);
    }
    *out = new dsa_result{dsa::report_json(result.report), result.report.final_best_energy};
    return DSA_OK;
  });
}

dsa_status dsa_sweep(const dsa_config* config, uint32_t count, int write_outputs,
                     dsa_result** out) {
  if (!config || !out) return fail(DSA_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded_run([&] {
    const auto& c = config->config;
    const auto sweep = dsa::run_sweep(c, count == 0 ? c.seeds : count);
    if (write_outputs) dsa::emit_sweep(sweep, c.output.dir);
    if (sweep.runs.empty()) {
      return fail(DSA_ERR_RUNTIME, "every run failed; first error: " + sweep.failures[0].error);
    }
    std::optional<double> median;
    if (sweep.final_best_energy.count > 0) median = sweep.final_best_energy.median;
    *out = new dsa_result{dsa::sweep_json(sweep), median};
    return DSA_OK;
  });
}

dsa_status dsa_verify(const dsa_config* config, int write_outputs, dsa_result** out) {
  if (!config || !out) return fail(DSA_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded_run([&] {
    const auto& c = config->config;
    dsa::IntermediateStore store(dsa::make_problem(c.problem));
    const auto report = dsa::run_verify(c, store);
    const std::string json = dsa::verify_json(report);
    if (write_outputs) {
      std::ostringstream dump;
      dsa::dump_store(dump, store);
      write_text(c.output.dir, "store.txt", dump.str());
      write_text(c.output.dir, "verify.json", json);
    }
    if (!report.best) return fail(DSA_ERR_RUNTIME, "no verified entry survived");
    *out = new dsa_result{json, report.best->energy};
    return DSA_OK;
  });
}

dsa_status dsa_oracle(const dsa_config* config, int write_outputs, dsa_result** out) {
  if (!config || !out) return fail(DSA_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded_run([&] {
    const auto& c = config->config;
    const auto report = dsa::run_oracle(c);
    const std::string json = dsa::oracle_json(report);
    if (write_outputs) write_text(c.output.dir, "oracle.json", json);
    *out = new dsa_result{json, report.optimum.energy};
    return DSA_OK;
  });
}

const char* dsa_result_json(const dsa_result* result) {
  return result ? result->json.c_str() : nullptr;
}

dsa_status dsa_result_energy(const dsa_result* result, double* out) {
  if (!result || !out) return fail(DSA_ERR_INVALID_ARGUMENT, "null argument");
  if (!result->energy) return fail(DSA_ERR_RUNTIME, "result has no energy");
  *out = *result->energy;
  return DSA_OK;
}

void dsa_result_free(dsa_result* result) { delete result; }

dsa_status dsa_amdahl_speedup(double p, uint64_t n, double* out) {
  if (!out) return fail(DSA_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = dsa::amdahl_speedup(p, n);
    return DSA_OK;
  });
}

dsa_status dsa_boltzmann_probability(double delta_e, double t, double k, double* out) {
  if (!out) return fail(DSA_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = dsa::boltzmann_probability(delta_e, t, k);
    return DSA_OK;
  });
}

}  // extern "C"
