#ifndef FAIRLENS_H
#define FAIRLENS_H

/* C interface to the fairlens engine. Datasets are opaque handles; every
 * entry point returns a status code and reports results through out
 * parameters. Strings returned through char** out parameters are owned by
 * the caller and must be released with fairlens_string_free(). All text in
 * and out is UTF-8; structured arguments and results are JSON. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fairlens_rc {
    FAIRLENS_OK = 0,
    FAIRLENS_E_PARSE = 1,      /* malformed input text: CSV, JSON, threshold maps */
    FAIRLENS_E_INVALID = 2,    /* well-formed but unusable arguments */
    FAIRLENS_E_INFEASIBLE = 3, /* requested construction provably has no solution */
    FAIRLENS_E_INTERNAL = 4    /* anything else; see fairlens_last_error() */
} fairlens_rc;

/* Opaque validated dataset. Create with parse/load, release with free. */
typedef struct fairlens_dataset fairlens_dataset;

/* Library version, a static string; never freed. */
const char* fairlens_version(void);

/* Message for the most recent failing call on this thread, empty if the
 * most recent call succeeded. Valid until the thread's next API call. */
const char* fairlens_last_error(void);

/* Releases a string returned through any char** out parameter. NULL is ok. */
void fairlens_string_free(char* text);

/* schema_json maps column roles to header names, all keys optional:
 *   {"group": "...", "score": "...", "target": "...", "decision": "..."}
 * NULL or "{}" keeps the default names. Item columns are recognized by the
 * "item_" prefix; other unmapped numeric columns become extra columns. */
fairlens_rc fairlens_dataset_parse(const char* csv_text, const char* schema_json,
                                   fairlens_dataset** out);
fairlens_rc fairlens_dataset_load(const char* path, const char* schema_json,
                                  fairlens_dataset** out);
void fairlens_dataset_free(fairlens_dataset* dataset);

/* Number of records; 0 for NULL. */
size_t fairlens_dataset_size(const fairlens_dataset* dataset);

/* Summary JSON: {"records": n, "groups": {label: n, ...}, "items": [...],
 * "extra_columns": [...], "has_decision": bool}. */
fairlens_rc fairlens_dataset_info(const fairlens_dataset* dataset, char** out_json);

/* Canonical CSV round-trip form of the dataset. */
fairlens_rc fairlens_dataset_to_csv(const fairlens_dataset* dataset, char** out_csv);

/* Fresh dataset with each score replaced by its within-group midrank
 * percentile in (0, 1). The input dataset is untouched. */
fairlens_rc fairlens_percentile_adjust(const fairlens_dataset* dataset,
                                       fairlens_dataset** out);

/* Runs a battery of fairness criteria. options_json keys, all optional
 * (NULL or "{}" runs the default battery):
 *   criteria            array of criterion names; empty = default battery
 *   tolerance           disparity allowed before a criterion fails
 *   group_as_one        label coded 1 in group-indicator correlations
 *   thresholds          "fixed:CUTOFF[:YSTAR]" | "file:PATH" |
 *                       "solver:CRITERION[:YSTAR]"
 *   fit_on              group whose records fit the regression; "" = pooled
 *   sign_policy         "both_signs" | "underprediction_only"
 *   calibration_bins, guion_bins, dif_strata
 *                       {"mode": "equal_width"|"equal_count",
 *                        "count": int, "min_per_cell": int}
 *   dif_ability         "rest_score" | "target"
 *   dif_flag_threshold  number
 *   einhorn_halfwidth   number; absent = a tenth of the pooled score sd
 *   thorndikian         {"lambda1": number, "lambda2": number}
 *   compromise_lambda, jones_percent, optimum_k   numbers
 *   optimum_candidates  array of column names; empty = every extra column
 *   include_timestamp   bool
 * out_report_csv may be NULL when only JSON is wanted. out_exit_code gets
 * the audit verdict: 0 all pass, 1 any fail, 2 undefined verdicts or an
 * infeasible threshold solve. */
fairlens_rc fairlens_audit_run(const fairlens_dataset* dataset, const char* options_json,
                               char** out_report_json, char** out_report_csv,
                               int* out_exit_code);

/* Per-group cutoffs equalizing one confusion-matrix criterion against the
 * reference group. params_json may be NULL or {"lambda1": .., "lambda2": ..}
 * (used by the "thorndikian" criterion). An unsolvable instance is a result,
 * not an error: out_json reports {"feasible": false, "diagnostic": ...}.
 * out_json: {"criterion", "y_star", "tolerance", "feasible",
 * "reference_group", "achieved_disparity", "diagnostic", "cutoffs":
 * {label: number|"inf"}, "thresholds_text": threshold-map text form}. */
fairlens_rc fairlens_solve_thresholds(const fairlens_dataset* dataset,
                                      const char* criterion, double y_star,
                                      double tolerance, const char* params_json,
                                      char** out_json);

/* Differential functioning of items (or of one named feature column, matched
 * on score). options_json keys, all optional:
 *   ability         "rest_score" | "target"       (item mode)
 *   strata          bin object as in fairlens_audit_run
 *   flag_threshold  number
 *   feature         column name; present = feature mode
 * out_exit_code: 0 nothing flagged, 1 anything flagged, 2 nothing flagged
 * but something undiagnosable. */
fairlens_rc fairlens_dif_run(const fairlens_dataset* dataset, const char* options_json,
                             char** out_json, int* out_exit_code);

/* Fair-score-correlation table for one culture/target correlation over a
 * grid of test/target correlations: CSV with columns rho_ry, target1..4,
 * one row per grid point from lo to hi in steps of step. */
fairlens_rc fairlens_figure2_csv(double rho_ay, double lo, double hi, double step,
                                 char** out_csv);

/* Generates a synthetic dataset. spec_json:
 *   {"kind": "two_group", "n": int, "groups": [{"label", "weight",
 *    "mean_r", "mean_y", "sd_r", "sd_y", "rho_ry"}, ...]}
 * | {"kind": "correlated", "n": int, "rho_ay": number, "rho_ry": number,
 *    "criterion": 1..4}
 * out_csv gets the dataset; out_sidecar_json (may be NULL) gets
 * {"spec": ..., "seed": ..., "generator": ..., "tool_version": ...},
 * enough to regenerate the file byte for byte. */
fairlens_rc fairlens_synth_run(const char* spec_json, uint64_t seed,
                               char** out_csv, char** out_sidecar_json);

#ifdef __cplusplus
}
#endif

#endif
