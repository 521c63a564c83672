#ifndef LPLAB_CAPI_H
#define LPLAB_CAPI_H

/* C interface to the experiment pipeline. Every entry point returns a status
 * code; nonzero codes match the CLI exit codes. On failure the thread-local
 * message from lplab_last_error() describes what went wrong. */

#ifdef __cplusplus
extern "C" {
#endif

#define LPLAB_OK 0
#define LPLAB_STATUS_VALIDATION 2 /* bad config, bad arguments */
#define LPLAB_STATUS_NUMERICAL 3  /* runtime, numerical, or I/O failure */

typedef struct lplab_experiment lplab_experiment;

/* Library version string, e.g. "0.1.0". */
const char* lplab_version(void);

/* Message for the most recent failure on the calling thread ("" if none). */
const char* lplab_last_error(void);

/* Parses and validates a JSON config file; on success *out owns the handle
 * and must be released with lplab_experiment_close. */
int lplab_experiment_open(const char* config_path, lplab_experiment** out);

/* Optional overrides between open and run. */
int lplab_experiment_set_kind(lplab_experiment* exp, const char* kind);
int lplab_experiment_set_output_root(lplab_experiment* exp, const char* dir);
int lplab_experiment_set_workers(lplab_experiment* exp, int workers);
int lplab_experiment_set_verbose(lplab_experiment* exp, int verbose);

/* Runs the configured pipeline and writes manifest.json under the output
 * root. Returns LPLAB_OK when every stage succeeded; otherwise the class of
 * the first failed stage, with partial outputs and the manifest on disk. */
int lplab_experiment_run(lplab_experiment* exp);

/* Absolute path of the manifest written by the last run ("" before run). */
const char* lplab_experiment_manifest_path(const lplab_experiment* exp);

/* Number of failed stages in the last run. */
int lplab_experiment_failed_stages(const lplab_experiment* exp);

void lplab_experiment_close(lplab_experiment* exp);

#ifdef __cplusplus
}
#endif

#endif /* LPLAB_CAPI_H */
