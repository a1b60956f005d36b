#ifndef TORUS2MICRO_H
#define TORUS2MICRO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
#define T2M_OK 0

#define T2M_NULL_POINTER 1

#define T2M_INVALID_ARGUMENT 2

#define T2M_RUNTIME_ERROR 3

/**
 * Opaque parsed experiment configuration.
 */
typedef struct T2mConfig T2mConfig;

/**
 * Opaque experiment report.
 */
typedef struct T2mReport T2mReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent error on this thread. Borrowed pointer, valid
 * until the next failing call on the same thread; never null.
 */
const char *t2m_last_error_message(void);

/**
 * Parses a `key = value` configuration text into an opaque handle.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
int32_t t2m_config_parse(const char *text, struct T2mConfig **out);

/**
 * Releases a configuration handle. Null is ignored.
 *
 * # Safety
 * `cfg` must come from `t2m_config_parse` and not be used afterwards.
 */
void t2m_config_free(struct T2mConfig *cfg);

/**
 * Runs the named experiment ("identities", "regimes", "infinity",
 * "quasimode" or "projection") and hands back an opaque report.
 *
 * # Safety
 * `cfg` must be a live handle, `name` NUL-terminated, `out` valid.
 */
int32_t t2m_run_experiment(const struct T2mConfig *cfg, const char *name, struct T2mReport **out);

/**
 * 1 if every verdict of the report passed, 0 otherwise (or on null).
 *
 * # Safety
 * `report` must be a live handle from `t2m_run_experiment`.
 */
int32_t t2m_report_passed(const struct T2mReport *report);

/**
 * Number of verdicts recorded in the report (0 on null).
 *
 * # Safety
 * `report` must be a live handle from `t2m_run_experiment`.
 */
uint64_t t2m_report_verdict_count(const struct T2mReport *report);

/**
 * Serializes the report (verdicts, regime table, diagnostics, rows) as a
 * JSON string owned by the caller; release with `t2m_string_free`.
 *
 * # Safety
 * `report` must be a live handle and `out` a valid pointer.
 */
int32_t t2m_report_to_json(const struct T2mReport *report, char **out);

/**
 * Writes `report.json` and the per-observable CSV files into `dir`.
 *
 * # Safety
 * `report` must be a live handle and `dir` a NUL-terminated path.
 */
int32_t t2m_report_write(const struct T2mReport *report, const char *dir);

/**
 * Releases a report handle. Null is ignored.
 *
 * # Safety
 * `report` must come from `t2m_run_experiment` and not be used afterwards.
 */
void t2m_report_free(struct T2mReport *report);

/**
 * Releases a string produced by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from `t2m_report_to_json` and not be used afterwards.
 */
void t2m_string_free(char *s);

/**
 * One-shot convenience: the real part of the averaged mode-`n` measurement
 * of a coherent wave packet, without exposing state handles. `lattice` and
 * `x0`/`xi0` are length-2 arrays.
 *
 * # Safety
 * All array pointers must reference at least two elements; `out_re` and
 * `out_im` must be valid.
 */
int32_t t2m_packet_mode_pairing(double hbar,
                                int32_t box_n,
                                const int64_t *lattice,
                                const double *x0,
                                const double *xi0,
                                int64_t n,
                                double *out_re,
                                double *out_im);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TORUS2MICRO_H */
