/* C interface to the distributed annealing simulator.
 *
 * Every call returns a dsa_status. On failure the message is available from
 * dsa_last_error() on the same thread until the next failing call. Handles
 * are opaque and owned by the caller; free them with the matching _free. */
#ifndef DSA_DSA_H
#define DSA_DSA_H

#include <stdint.h>

#if defined(_WIN32)
#define DSA_API __declspec(dllexport)
#else
#define DSA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dsa_status {
  DSA_OK = 0,
  DSA_ERR_VALIDATION = 1,       /* bad config, scenario, instance or solution */
  DSA_ERR_RUNTIME = 2,          /* run failed: degenerate landscape, I/O, empty reduce */
  DSA_ERR_INVALID_ARGUMENT = 3  /* null handle or out-of-range numeric argument */
} dsa_status;

typedef struct dsa_config dsa_config;
typedef struct dsa_result dsa_result;

DSA_API const char* dsa_version(void);
DSA_API const char* dsa_last_error(void);

/* Relative paths inside the file resolve against its directory. */
DSA_API dsa_status dsa_config_load(const char* path, dsa_config** out);
DSA_API dsa_status dsa_config_parse(const char* json_text, const char* base_dir,
                                    dsa_config** out);
DSA_API dsa_status dsa_config_set_seed(dsa_config* config, uint64_t seed);
/* Either argument may be NULL to keep the configured value. format is
 * "csv" or "json". */
DSA_API dsa_status dsa_config_set_output(dsa_config* config, const char* dir,
                                         const char* format);
DSA_API void dsa_config_free(dsa_config* config);

/* When write_outputs is nonzero the artifacts go to the configured output
 * directory. A sweep count of 0 uses the configured seed count. */
DSA_API dsa_status dsa_run(const dsa_config* config, int write_outputs, dsa_result** out);
DSA_API dsa_status dsa_sweep(const dsa_config* config, uint32_t count, int write_outputs,
                             dsa_result** out);
DSA_API dsa_status dsa_verify(const dsa_config* config, int write_outputs, dsa_result** out);
DSA_API dsa_status dsa_oracle(const dsa_config* config, int write_outputs, dsa_result** out);

/* JSON summary. Valid until the result is freed. */
DSA_API const char* dsa_result_json(const dsa_result* result);
/* Headline energy: final best (run), median final best (sweep), reduced
 * best (verify) or exact optimum (oracle). */
DSA_API dsa_status dsa_result_energy(const dsa_result* result, double* out);
DSA_API void dsa_result_free(dsa_result* result);

DSA_API dsa_status dsa_amdahl_speedup(double p, uint64_t n, double* out);
DSA_API dsa_status dsa_boltzmann_probability(double delta_e, double t, double k, double* out);

#ifdef __cplusplus
}
#endif

#endif /* DSA_DSA_H */
