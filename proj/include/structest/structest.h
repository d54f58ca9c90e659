/* structest: likelihood-ratio test of a rank-1 indicator-by-group mean
 * structure, with scenario simulators and Monte Carlo calibration.
 *
 * All functions are thread-safe. Objects are returned through opaque
 * handles that must be released with the matching *_free function; strings
 * returned through char** out-parameters are released with
 * structest_string_free. Failures return a nonzero status and leave a
 * message retrievable with structest_last_error on the calling thread.
 */
#ifndef STRUCTEST_H
#define STRUCTEST_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(STRUCTEST_BUILD)
#define STRUCTEST_API __declspec(dllexport)
#else
#define STRUCTEST_API __declspec(dllimport)
#endif
#else
#define STRUCTEST_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum structest_status {
  STRUCTEST_OK = 0,
  STRUCTEST_ERR_INVALID_ARGUMENT = 1, /* bad options, spec, or call */
  STRUCTEST_ERR_PARSE = 2,            /* malformed input data */
  STRUCTEST_ERR_DATA = 3,             /* dataset unusable: empty cells, too few groups */
  STRUCTEST_ERR_NUMERICAL = 4,        /* no finite answer exists */
  STRUCTEST_ERR_IO = 5
} structest_status;

typedef struct structest_dataset structest_dataset;
typedef struct structest_test_result structest_test_result;
typedef struct structest_calibration structest_calibration;

STRUCTEST_API const char* structest_version(void);

/* Message for the calling thread's most recent failure; empty if none. */
STRUCTEST_API const char* structest_last_error(void);

STRUCTEST_API void structest_string_free(char* s);

/* ------------------------------------------------------------------ */
/* Datasets                                                            */
/* ------------------------------------------------------------------ */

/* Wide CSV: one row per subject. indicator_columns is a comma-separated
 * header-name list; strata_columns (optional, NULL for none) likewise.
 * Missing entries are empty fields or the literal NA. */
STRUCTEST_API structest_status structest_dataset_from_csv(const char* path,
                                                          const char* indicator_columns,
                                                          const char* group_column,
                                                          const char* strata_columns,
                                                          structest_dataset** out);

/* values: row-major n_subjects x n_indicators with NaN as the missing
 * marker. group_labels / stratum_labels: one C string per subject
 * (stratum_labels may be NULL). */
STRUCTEST_API structest_status structest_dataset_from_arrays(const double* values,
                                                             int64_t n_subjects,
                                                             int64_t n_indicators,
                                                             const char* const* group_labels,
                                                             const char* const* stratum_labels,
                                                             structest_dataset** out);

STRUCTEST_API void structest_dataset_free(structest_dataset* ds);

STRUCTEST_API int64_t structest_dataset_subjects(const structest_dataset* ds);
STRUCTEST_API int64_t structest_dataset_indicators(const structest_dataset* ds);
STRUCTEST_API int64_t structest_dataset_groups(const structest_dataset* ds);
/* Count of non-missing entries (M). */
STRUCTEST_API int64_t structest_dataset_observed(const structest_dataset* ds);

/* Dimension / missingness / flag report as a JSON object. */
STRUCTEST_API structest_status structest_dataset_validation_json(const structest_dataset* ds,
                                                                 char** out);

STRUCTEST_API structest_status structest_dataset_to_csv(const structest_dataset* ds, char** out);
STRUCTEST_API structest_status structest_dataset_write_csv(const structest_dataset* ds,
                                                           const char* path);

/* ------------------------------------------------------------------ */
/* The test                                                            */
/* ------------------------------------------------------------------ */

typedef struct structest_test_options {
  double tol;        /* convergence threshold on the residual mean square */
  int64_t max_iter;
  const char* ref_group;   /* initialization group label; NULL: automatic */
  int stratified;          /* nonzero: per-stratum tests combined by summation */
  int with_oracle;         /* nonzero: attach the independent rank-1 cross-check */
  const double* lambda;    /* loadings for the diagnostic tables; NULL: none */
  int64_t lambda_len;
  int implied_diagnostics; /* nonzero: diagnostic tables with fitted loadings */
} structest_test_options;

STRUCTEST_API void structest_test_options_init(structest_test_options* options);

/* A fit that hits max_iter without converging is NOT an error: the result
 * carries the partial fit with the converged flag cleared. */
STRUCTEST_API structest_status structest_run_test(const structest_dataset* ds,
                                                  const structest_test_options* options,
                                                  structest_test_result** out);

STRUCTEST_API void structest_test_result_free(structest_test_result* result);

/* For stratified results the statistic/df/p_value getters return the
 * combined values (sum of per-stratum statistics and dfs). */
STRUCTEST_API double structest_test_result_statistic(const structest_test_result* r);
STRUCTEST_API int64_t structest_test_result_df(const structest_test_result* r);
STRUCTEST_API double structest_test_result_p_value(const structest_test_result* r);
STRUCTEST_API double structest_test_result_sigma2_restricted(const structest_test_result* r);
STRUCTEST_API double structest_test_result_sigma2_full(const structest_test_result* r);
STRUCTEST_API int64_t structest_test_result_m_obs(const structest_test_result* r);
STRUCTEST_API int structest_test_result_converged(const structest_test_result* r);
STRUCTEST_API int structest_test_result_degenerate(const structest_test_result* r);
STRUCTEST_API int structest_test_result_stratified(const structest_test_result* r);
STRUCTEST_API int64_t structest_test_result_strata(const structest_test_result* r);

/* format: "json", "text" or "csv-table". */
STRUCTEST_API structest_status structest_test_result_render(const structest_test_result* r,
                                                            const char* format,
                                                            const char* invocation, char** out);

/* ------------------------------------------------------------------ */
/* Scalar helpers                                                      */
/* ------------------------------------------------------------------ */

/* Chi-squared upper-tail probability; NaN on invalid input. */
STRUCTEST_API double structest_chi_sq_sf(double x, int64_t df);

/* (n - 1)(p - 1); negative on invalid input. */
STRUCTEST_API int64_t structest_degrees_of_freedom(int64_t n, int64_t p);

/* ------------------------------------------------------------------ */
/* Simulation and calibration                                          */
/* ------------------------------------------------------------------ */

/* scenario_json describes the generator; see the project README for the
 * schema. Identical (scenario, seed) pairs produce identical datasets. */
STRUCTEST_API structest_status structest_simulate(const char* scenario_json, uint64_t seed,
                                                  structest_dataset** out);

/* Exact population cell means implied by a structural or direct scenario,
 * as a JSON n x p array of rows. */
STRUCTEST_API structest_status structest_population_cell_means(const char* scenario_json,
                                                               char** out);

/* Rejection rate of the test at alpha_level over `replicates` simulated
 * datasets with derived per-replicate seeds. threads = 0 uses the hardware
 * concurrency; results do not depend on the thread count. */
STRUCTEST_API structest_status structest_calibrate(const char* scenario_json, double alpha_level,
                                                   int64_t replicates, uint64_t seed,
                                                   int64_t threads, structest_calibration** out);

/* grid_json: JSON array of scenario objects; one result row per entry, in
 * input order. */
STRUCTEST_API structest_status structest_power_curve(const char* grid_json, double alpha_level,
                                                     int64_t replicates, uint64_t seed,
                                                     int64_t threads,
                                                     structest_calibration** out);

STRUCTEST_API void structest_calibration_free(structest_calibration* c);
STRUCTEST_API int64_t structest_calibration_rows(const structest_calibration* c);
STRUCTEST_API double structest_calibration_rate(const structest_calibration* c, int64_t row);
STRUCTEST_API double structest_calibration_ci_low(const structest_calibration* c, int64_t row);
STRUCTEST_API double structest_calibration_ci_high(const structest_calibration* c, int64_t row);
STRUCTEST_API int64_t structest_calibration_rejections(const structest_calibration* c,
                                                       int64_t row);
STRUCTEST_API structest_status structest_calibration_render(const structest_calibration* c,
                                                            const char* format,
                                                            const char* invocation, char** out);

/* ------------------------------------------------------------------ */
/* Diagnostics                                                         */
/* ------------------------------------------------------------------ */

/* Scaled mean contrasts, loading ratios and cross-indicator residuals for
 * one dataset. lambda NULL: loadings implied by the restricted fit.
 * ref_indicator is 1-based. */
STRUCTEST_API structest_status structest_diagnose(const structest_dataset* ds,
                                                  const double* lambda, int64_t lambda_len,
                                                  const char* ref_group, int64_t ref_indicator,
                                                  const char* format, const char* invocation,
                                                  char** out);

#ifdef __cplusplus
}
#endif

#endif /* STRUCTEST_H */
