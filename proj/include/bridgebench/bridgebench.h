#ifndef BRIDGEBENCH_BRIDGEBENCH_H
#define BRIDGEBENCH_BRIDGEBENCH_H

#include <stddef.h>
#include <stdint.h>

#if defined(BRIDGEBENCH_BUILDING)
#define BB_API __attribute__((visibility("default")))
#else
#define BB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bb_status {
  BB_OK = 0,
  BB_ERR_VALIDATION_FAILED = 1,
  BB_ERR_PARSE = 2,
  BB_ERR_CUTOFF = 3,
  BB_ERR_NO_CONVERGENCE = 4,
  BB_ERR_POSITIVE_FEEDBACK = 5,
  BB_ERR_DIVERGED = 6,
  BB_ERR_WINDOW_TOO_SHORT = 7,
  BB_ERR_NON_COHERENT_WINDOW = 8,
  BB_ERR_RECORD_TOO_SHORT = 9,
  BB_ERR_NONLINEAR_REGIME = 10,
  BB_ERR_INVALID_ARGUMENT = 11,
  BB_ERR_IO = 12,
  BB_ERR_INTERNAL = 100
} bb_status;

typedef enum bb_verdict_status {
  BB_VERDICT_PASS = 0,
  BB_VERDICT_FAIL = 1,
  BB_VERDICT_NA = 2
} bb_verdict_status;

/* Simulation configuration. */
typedef struct bb_config bb_config;

/* Tables, verdicts and written files produced by one call. */
typedef struct bb_result bb_result;

BB_API const char* bb_version(void);

/* Message of the most recent failure on the calling thread ("" if none). */
BB_API const char* bb_last_error(void);

/* "OK", "VALIDATION_FAILED", "CUTOFF", ... */
BB_API const char* bb_status_name(bb_status status);

/* Scenario names: "open", "pmos", "nmos", "rc", "fig7", "fig9". */
BB_API bb_status bb_config_default(const char* scenario, bb_config** out);
BB_API bb_status bb_config_parse(const char* text, bb_config** out);
BB_API bb_status bb_config_load(const char* path, bb_config** out);
BB_API void bb_config_free(bb_config* config);
BB_API bb_status bb_config_set_seed(bb_config* config, uint64_t seed);

/* Serialized config. Returned pointer lives until the next call on config. */
BB_API const char* bb_config_text(bb_config* config);

/* Expands "lo:hi:log:n", "lo:hi:lin:n" or "a,b,c". Writes up to capacity
   values and stores the full count in *count. */
BB_API bb_status bb_parse_grid(const char* spec, double* values, size_t capacity, size_t* count);

/* Subcommands. A NULL config selects the built-in default. */
BB_API bb_status bb_bridge_dc(const bb_config* config, bb_result** out);
BB_API bb_status bb_loop_sweep(const bb_config* config, const double* gains, size_t gain_count,
                               double dr_min, double dr_max, int points, bb_result** out);
BB_API bb_status bb_sim(const bb_config* config, bb_result** out);
/* Supply-tone sweep over freqs with a fixed R1 signal tone at f_signal. */
BB_API bb_status bb_analyze_psrr(const bb_config* config, const double* freqs, size_t freq_count,
                                 double f_signal, bb_result** out);
BB_API bb_status bb_analyze_noise(const bb_config* config, double freq_hz, bb_result** out);

/* Runs "fig5", "fig7", "fig9" or "table1", writing CSVs under out_dir.
   config may be NULL; seed is used when has_seed is nonzero. */
BB_API bb_status bb_experiment(const char* id, const bb_config* config, const char* out_dir,
                               int has_seed, uint64_t seed, int json, bb_result** out);

BB_API void bb_result_free(bb_result* result);

BB_API size_t bb_result_table_count(const bb_result* result);
BB_API const char* bb_result_table_name(const bb_result* result, size_t index);
BB_API const char* bb_result_table_csv(const bb_result* result, size_t index);
BB_API const char* bb_result_table_json(const bb_result* result, size_t index);

BB_API size_t bb_result_verdict_count(const bb_result* result);
BB_API bb_verdict_status bb_result_verdict_status(const bb_result* result, size_t index);
BB_API const char* bb_result_verdict_name(const bb_result* result, size_t index);
BB_API const char* bb_result_verdict_detail(const bb_result* result, size_t index);

BB_API size_t bb_result_output_count(const bb_result* result);
BB_API const char* bb_result_output_path(const bb_result* result, size_t index);

/* Nonzero when no verdict failed. */
BB_API int bb_result_passed(const bb_result* result);
BB_API double bb_result_wall_seconds(const bb_result* result);

#ifdef __cplusplus
}
#endif

#endif
