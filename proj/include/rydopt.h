/* C API of the Rydberg lattice optimal-control toolkit.
 *
 * Usage: create a session, load a JSON run config, optionally override
 * options, then run one of the commands. All functions are thread-compatible
 * (one session per thread); a session is not internally synchronized.
 *
 * Returned strings stay owned by the session and are valid until the next
 * call on the same session.
 */
#ifndef RYDOPT_H
#define RYDOPT_H

#ifdef __cplusplus
extern "C" {
#endif

typedef struct rydopt_session rydopt_session;

typedef enum rydopt_status {
  RYDOPT_OK = 0,
  RYDOPT_ERROR_CONFIG = 2,     /* bad config file or run setup */
  RYDOPT_ERROR_NUMERIC = 3,    /* propagation or eigensolver failure */
  RYDOPT_ERROR_CONSTRAINT = 4, /* control-constraint violation */
  RYDOPT_ERROR_USAGE = 5       /* API misuse (null handles, bad command) */
} rydopt_status;

rydopt_session* rydopt_session_new(void);
void rydopt_session_free(rydopt_session* session);

rydopt_status rydopt_load_config_file(rydopt_session* session, const char* path);
rydopt_status rydopt_load_config_json(rydopt_session* session, const char* json_text);

/* Keys: "out" (output directory), "workers", "seed" (overrides all seeds
 * deterministically), "budget" (evaluation budget per super-iteration). */
rydopt_status rydopt_set_option(rydopt_session* session, const char* key,
                                const char* value);

/* Commands: "spectrum", "crystal", "staircase", "ghz", "arbitrary",
 * "simulate". staircase/simulate need pulse_csv; others ignore it. */
rydopt_status rydopt_run(rydopt_session* session, const char* command,
                         const char* pulse_csv);

/* Summary of the last successful run as a JSON string; NULL if none. */
const char* rydopt_summary_json(const rydopt_session* session);

/* Message of the last error on this session; empty string if none. */
const char* rydopt_last_error(const rydopt_session* session);

const char* rydopt_version(void);

#ifdef __cplusplus
}
#endif

#endif /* RYDOPT_H */
