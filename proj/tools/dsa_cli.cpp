// Command-line front end. Talks to the simulator only through the C API.
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "dsa/dsa.h"

namespace {

int exit_code(dsa_status s) {
  switch (s) {
    case DSA_OK:
      return 0;
    case DSA_ERR_VALIDATION:
    case DSA_ERR_INVALID_ARGUMENT:
      return 1;
    default:
      return 2;
  }
}

int report(dsa_status s, dsa_result* result) {
  if (s != DSA_OK) {
    std::fprintf(stderr, "error: %s\n", dsa_last_error());
    return exit_code(s);
  }
  std::fputs(dsa_result_json(result), stdout);
  dsa_result_free(result);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed simulated annealing fault-tolerance simulator"};
  app.set_version_flag("--version", dsa_version());
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string format;
  std::uint32_t seeds = 0;

  app.add_option("--config", config_path, "Experiment config (JSON)")->required();
  auto* seed_opt = app.add_option("--seed", seed, "Master seed, overrides the config");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--format", format, "Trace format")->check(CLI::IsMember({"csv", "json"}));

  auto* run = app.add_subcommand("run", "Run one experiment and write its artifacts");
  auto* sweep = app.add_subcommand("sweep", "Run consecutive seeds and summarize");
  sweep->add_option("--seeds", seeds, "Number of seeds (default: config value)")
      ->check(CLI::PositiveNumber);
  auto* verify = app.add_subcommand("verify", "MapReduce job with a store audit");
  auto* oracle = app.add_subcommand("oracle", "Exact optimum by enumeration");
  app.fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  dsa_config* config = nullptr;
  dsa_status s = dsa_config_load(config_path.c_str(), &config);
  if (s != DSA_OK) {
    std::fprintf(stderr, "error: %s\n", dsa_last_error());
    return exit_code(s);
  }
  if (*seed_opt) dsa_config_set_seed(config, seed);
  s = dsa_config_set_output(config, out_dir.empty() ? nullptr : out_dir.c_str(),
                            format.empty() ? nullptr : format.c_str());
  if (s != DSA_OK) {
    dsa_config_free(config);
    std::fprintf(stderr, "error: %s\n", dsa_last_error());
    return exit_code(s);
  }

  dsa_result* result = nullptr;
  if (run->parsed()) {
    s = dsa_run(config, 1, &result);
  } else if (sweep->parsed()) {
    s = dsa_sweep(config, seeds, 1, &result);
  } else if (verify->parsed()) {
    s = dsa_verify(config, 1, &result);
  } else if (oracle->parsed()) {
    s = dsa_oracle(config, 1, &result);
  }
  dsa_config_free(config);
  return report(s, result);
}
