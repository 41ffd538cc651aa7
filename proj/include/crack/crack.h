/*
 * C interface to the NR-RIS channel-reciprocity attack simulator.
 *
 * Objects are opaque handles created by *_new / *_load and released by the
 * matching *_free. Every fallible call returns a crack_status; on failure a
 * human-readable message is available from crack_last_error() on the same
 * thread until the next failing call. Strings returned through char** out
 * parameters are heap-allocated by the library and must be released with
 * crack_string_free().
 *
 * Matrices cross the boundary as row-major double arrays.
 */
#ifndef CRACK_CRACK_H
#define CRACK_CRACK_H

#include <stddef.h>
#include <stdint.h>

#if defined(CRACK_BUILDING_LIBRARY)
#define CRACK_API __attribute__((visibility("default")))
#else
#define CRACK_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum crack_status {
  CRACK_OK = 0,
  CRACK_ERR_INVALID_ARGUMENT = 1,
  CRACK_ERR_PARSE = 2,
  CRACK_ERR_IO = 3,
  CRACK_ERR_ZF_SINGULAR = 4,
  CRACK_ERR_STATE = 5,
  CRACK_ERR_INTERNAL = 99
} crack_status;

typedef struct crack_config crack_config;
typedef struct crack_env crack_env;
typedef struct crack_session crack_session;

CRACK_API const char* crack_version(void);
CRACK_API const char* crack_last_error(void);
CRACK_API const char* crack_status_name(crack_status status);
CRACK_API void crack_string_free(char* s);

/* ---- scenario configuration ------------------------------------------- */

/* Default scenario with the reference parameters. */
CRACK_API crack_status crack_config_new(crack_config** out);
/* Reads and validates a JSON config file. */
CRACK_API crack_status crack_config_load(const char* path, crack_config** out);
CRACK_API crack_status crack_config_parse(const char* json_text, crack_config** out);
CRACK_API crack_status crack_config_clone(const crack_config* cfg, crack_config** out);
CRACK_API void crack_config_free(crack_config* cfg);
/* key is a dotted path ("array.m") or an unambiguous leaf ("m"); value is a
 * JSON literal or a bare word. Does not validate; call crack_config_validate. */
CRACK_API crack_status crack_config_set(crack_config* cfg, const char* key, const char* value);
CRACK_API crack_status crack_config_validate(const crack_config* cfg);
CRACK_API crack_status crack_config_to_json(const crack_config* cfg, char** out_json);
/* The run.* section: default seed and trial count. Either pointer may be NULL. */
CRACK_API crack_status crack_config_run_defaults(const crack_config* cfg, uint64_t* seed,
                                                 uint64_t* trials);

/* ---- Monte Carlo evaluation -------------------------------------------- */

typedef struct crack_ergodic_report {
  double sum_rate_mean;     /* bit/s/Hz */
  double sum_rate_ci95;
  double sum_rate_bps;      /* sum_rate_mean * bandwidth */
  double sum_secrecy_mean;  /* bit/s/Hz */
  double sum_secrecy_ci95;
  double sop;               /* user-trial pairs in outage */
  double sop_ci95;
  double sop_any;           /* trials with any user in outage */
  double max_interference_ratio;
  uint64_t trials;
  uint64_t outage_count;
} crack_ergodic_report;

/* strategy: none | nr-blind | nr-ha | nd-ris | dris1 | dris2 | dris3 | jammer
 * precoder: mrt | zf */
CRACK_API crack_status crack_monte_carlo(const crack_config* cfg, const char* strategy,
                                         const char* precoder, uint64_t trials,
                                         uint64_t seed, crack_ergodic_report* out);

typedef struct crack_experiment {
  const char* variable; /* n | m | l | none */
  const int* values;    /* may be NULL with num_values == 0 for the default grid */
  size_t num_values;
  const char* const* strategies;
  size_t num_strategies;
  const char* const* precoders;
  size_t num_precoders;
  uint64_t trials;
  uint64_t seed;
} crack_experiment;

/* One CSV row per (value, strategy, precoder), in that nesting order. */
CRACK_API crack_status crack_sweep_csv(const crack_config* cfg, const crack_experiment* spec,
                                       char** out_csv);
/* One CSV row per sampled NR-RIS configuration (held fixed over `trials`). */
CRACK_API crack_status crack_histogram_csv(const crack_config* cfg, int num_configs,
                                           uint64_t trials, uint64_t seed, char** out_csv);
/* Text dump of the scattering matrices a strategy uses in one block. */
CRACK_API crack_status crack_schedule_text(const crack_config* cfg, const char* strategy,
                                           uint64_t seed, uint64_t block, char** out_text);
/* Runs the invariant suite. *all_passed is set to 1 or 0. */
CRACK_API crack_status crack_selfcheck(const crack_config* cfg, char** out_report,
                                       int* all_passed);

/* ---- decision environment ---------------------------------------------- */

CRACK_API crack_status crack_env_new(const crack_config* cfg, crack_env** out);
CRACK_API void crack_env_free(crack_env* env);
CRACK_API crack_status crack_env_shape(const crack_env* env, int* m, int* k,
                                       int* episode_length);
/* amp and phase receive M*K values each. */
CRACK_API crack_status crack_env_reset(crack_env* env, uint64_t seed, double* amp,
                                       double* phase);
/* w_amp, w_phase: M*K values in [0, 1]. next_amp/next_phase receive M*K
 * values; rates (K values) may be NULL. */
CRACK_API crack_status crack_env_step(crack_env* env, const double* w_amp,
                                      const double* w_phase, double* next_amp,
                                      double* next_phase, double* reward, int* done,
                                      double* rates);

/* ---- line protocol ----------------------------------------------------- */

CRACK_API crack_status crack_session_new(const crack_config* cfg, crack_session** out);
CRACK_API void crack_session_free(crack_session* session);
/* One request line in, one reply line out (without trailing newline).
 * Protocol-level errors are reported inside the reply with status CRACK_OK. */
CRACK_API crack_status crack_session_handle(crack_session* session, const char* line,
                                            char** out_reply);
CRACK_API int crack_session_closed(const crack_session* session);

#ifdef __cplusplus
}
#endif

#endif /* CRACK_CRACK_H */
