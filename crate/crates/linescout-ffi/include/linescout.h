/* C interface of the linescout library. Generated by cbindgen; do not edit. */

#ifndef LINESCOUT_H
#define LINESCOUT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of every fallible call.
 */
typedef enum LsStatus {
  LS_STATUS_OK = 0,
  LS_STATUS_NULL_POINTER = 1,
  LS_STATUS_INVALID_ARGUMENT = 2,
  LS_STATUS_VALIDATION = 3,
  LS_STATUS_CONTROLLER_STUCK = 4,
  LS_STATUS_BELIEF_COLLAPSE = 5,
  LS_STATUS_IO = 6,
  LS_STATUS_ESTIMATOR = 7,
  LS_STATUS_INTERNAL = 8,
} LsStatus;

/**
 * Estimator selector for result queries.
 */
typedef enum LsEstimator {
  LS_ESTIMATOR_BISECTOR = 0,
  LS_ESTIMATOR_MAX_MARGIN = 1,
  LS_ESTIMATOR_POLYGON_CENTER = 2,
} LsEstimator;

/**
 * Opaque result of a deterministic (noiseless) run.
 */
typedef struct LsDetRun LsDetRun;

/**
 * Opaque scenario handle.
 */
typedef struct LsScenario LsScenario;

/**
 * Opaque result of a stochastic (noisy) run.
 */
typedef struct LsStochRun LsStochRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *ls_last_error_message(void);

/**
 * Library version as a static C string.
 */
const char *ls_version(void);

/**
 * Load a scenario from a TOML file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be a valid pointer.
 */
enum LsStatus ls_scenario_from_file(const char *path, struct LsScenario **out);

/**
 * Parse a scenario from TOML text.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be a valid pointer.
 */
enum LsStatus ls_scenario_from_toml(const char *text, struct LsScenario **out);

/**
 * Built-in noiseless default scenario.
 */
enum LsStatus ls_scenario_builtin_det(struct LsScenario **out);

/**
 * Built-in noisy default scenario (keep probability 0.7).
 */
enum LsStatus ls_scenario_builtin_stoch(struct LsScenario **out);

/**
 * Replace the scenario seed.
 *
 * # Safety
 * `scenario` must be a live handle from a `ls_scenario_*` constructor.
 */
enum LsStatus ls_scenario_set_seed(struct LsScenario *scenario, uint64_t seed);

/**
 * Replace the horizon (number of control steps).
 *
 * # Safety
 * `scenario` must be a live handle from a `ls_scenario_*` constructor.
 */
enum LsStatus ls_scenario_set_horizon(struct LsScenario *scenario, size_t horizon);

/**
 * # Safety
 * `scenario` must come from a `ls_scenario_*` constructor and not be freed
 * twice.
 */
void ls_scenario_free(struct LsScenario *scenario);

/**
 * Execute the noiseless sampling loop.
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be valid.
 */
enum LsStatus ls_run_det(const struct LsScenario *scenario, struct LsDetRun **out);

/**
 * Number of trajectory rows (horizon + 1).
 *
 * # Safety
 * `run` must be a live handle.
 */
size_t ls_det_run_len(const struct LsDetRun *run);

/**
 * Read one trajectory row.
 *
 * # Safety
 * `run` must be a live handle; output pointers may be null to skip fields.
 */
enum LsStatus ls_det_run_state(const struct LsDetRun *run,
                               size_t index,
                               double *x,
                               double *z,
                               double *theta,
                               int32_t *observed);

/**
 * Line estimate from a finished run, with errors against the hidden truth.
 *
 * # Safety
 * `run` must be a live handle; output pointers may be null to skip fields.
 */
enum LsStatus ls_det_run_estimate(const struct LsDetRun *run,
                                  enum LsEstimator which,
                                  double *rho,
                                  double *c,
                                  double *dtheta,
                                  double *dc);

/**
 * Slope bounds (radians) of the final version space.
 *
 * # Safety
 * `run` must be a live handle; output pointers may be null to skip fields.
 */
enum LsStatus ls_det_run_slope_bounds(const struct LsDetRun *run,
                                      double *theta_lo,
                                      double *theta_hi);

/**
 * Intercept bounds (meters) of the final version space.
 *
 * # Safety
 * `run` must be a live handle; output pointers may be null to skip fields.
 */
enum LsStatus ls_det_run_intercept_bounds(const struct LsDetRun *run, double *c_lo, double *c_hi);

/**
 * # Safety
 * `run` must come from [`ls_run_det`] and not be freed twice.
 */
void ls_det_run_free(struct LsDetRun *run);

/**
 * Execute the noisy sampling loop with the given hypothesis weight floor
 * (pass a negative value for the default 0.05).
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be valid.
 */
enum LsStatus ls_run_stoch(const struct LsScenario *scenario,
                           double weight_floor,
                           struct LsStochRun **out);

/**
 * Number of surviving hypotheses.
 *
 * # Safety
 * `run` must be a live handle.
 */
size_t ls_stoch_run_hypothesis_count(const struct LsStochRun *run);

/**
 * Maximum-posterior report: slope interval (radians), intercept interval
 * and posterior probability.
 *
 * # Safety
 * `run` must be a live handle; output pointers may be null to skip fields.
 */
enum LsStatus ls_stoch_run_map_report(const struct LsStochRun *run,
                                      double *theta_lo,
                                      double *theta_hi,
                                      double *c_lo,
                                      double *c_hi,
                                      double *probability);

/**
 * Credible parameter bounds at the given level, with the attained
 * cumulative probability and whether the hidden truth is covered.
 *
 * # Safety
 * `run` must be a live handle; output pointers may be null to skip fields.
 */
enum LsStatus ls_stoch_run_credible(const struct LsStochRun *run,
                                    double level,
                                    double *theta_lo,
                                    double *theta_hi,
                                    double *c_lo,
                                    double *c_hi,
                                    double *attained,
                                    bool *covers_truth);

/**
 * # Safety
 * `run` must come from [`ls_run_stoch`] and not be freed twice.
 */
void ls_stoch_run_free(struct LsStochRun *run);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LINESCOUT_H */
