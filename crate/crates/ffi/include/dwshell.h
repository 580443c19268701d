/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef DWSHELL_H
#define DWSHELL_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum DwStatus {
  DW_STATUS_OK = 0,
  DW_STATUS_NULL_POINTER = 1,
  DW_STATUS_INVALID_ARGUMENT = 2,
  DW_STATUS_DIMENSION_MISMATCH = 3,
  DW_STATUS_UNSTABLE = 4,
  DW_STATUS_NUMERIC = 5,
  DW_STATUS_BUFFER_TOO_SMALL = 6,
  DW_STATUS_PANIC = 7,
} DwStatus;

/**
 * Verdict of a single separation condition.
 */
typedef enum DwVerdictStatus {
  DW_VERDICT_STATUS_SEPARATED = 0,
  DW_VERDICT_STATUS_INTERSECTING = 1,
  DW_VERDICT_STATUS_UNDECIDED = 2,
} DwVerdictStatus;

typedef enum DwMethod {
  DW_METHOD_DW = 0,
  DW_METHOD_THETA_SRG = 1,
  DW_METHOD_GAIN_PHASE = 2,
} DwMethod;

typedef enum DwOverall {
  DW_OVERALL_CERTIFIED = 0,
  DW_OVERALL_NOT_CERTIFIED = 1,
  DW_OVERALL_COUNTEREXAMPLE = 2,
} DwOverall;

typedef struct DwMatrix DwMatrix;

typedef struct DwNyquistReport DwNyquistReport;

typedef struct DwStabilityReport DwStabilityReport;

typedef struct DwSystem DwSystem;

typedef struct DwVerdict DwVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread (empty after a success).
 * Copies into `buf` when it is large enough; returns the needed size including the NUL.
 */
size_t dw_last_error_message(char *buf, size_t cap);

/**
 * Library version as a static NUL-terminated string.
 */
const char *dw_version(void);

/**
 * n×n complex matrix from 2n² doubles: row-major, (re, im) interleaved.
 */
enum DwStatus dw_matrix_new(size_t n, const double *re_im, struct DwMatrix **out_matrix);

void dw_matrix_free(struct DwMatrix *m);

/**
 * Dimension of the matrix, 0 for a null handle.
 */
size_t dw_matrix_dim(const struct DwMatrix *m);

/**
 * Boundary point cloud of the DW shell: 3 doubles (Re z, Im z, ν) per point.
 */
enum DwStatus dw_shell_boundary(const struct DwMatrix *m,
                                size_t points,
                                double *buf,
                                size_t cap,
                                size_t *written);

/**
 * Boundary cloud of the inverse shell with ν ≤ nu_cap; `truncated` is set when points were dropped.
 */
enum DwStatus dw_inverse_shell_boundary(const struct DwMatrix *m,
                                        size_t points,
                                        double nu_cap,
                                        double *buf,
                                        size_t cap,
                                        size_t *written,
                                        bool *truncated);

/**
 * θ-SRG phase interval [lo, hi] of the matrix about the axis θ.
 */
enum DwStatus dw_theta_srg_phases(const struct DwMatrix *m, double theta, double *lo, double *hi);

/**
 * Evaluates one condition (snake_case id such as "dw_separation") for I + A·U*·B·U.
 */
enum DwStatus dw_check_condition(const struct DwMatrix *a,
                                 const struct DwMatrix *b,
                                 const char *condition,
                                 size_t resolution,
                                 struct DwVerdict **out_verdict);

void dw_verdict_free(struct DwVerdict *v);

/**
 * Undecided for a null handle.
 */
enum DwVerdictStatus dw_verdict_status(const struct DwVerdict *v);

/**
 * True when the tested condition definitely fails.
 */
bool dw_verdict_violated(const struct DwVerdict *v);

/**
 * Separation margin (may be ±∞); NaN for a null handle.
 */
double dw_verdict_margin(const struct DwVerdict *v);

/**
 * Witness θ; returns false (leaving `theta` untouched) when the verdict has none.
 */
bool dw_verdict_witness_theta(const struct DwVerdict *v, double *theta);

/**
 * Verdict as JSON.
 */
enum DwStatus dw_verdict_json(const struct DwVerdict *v, char *buf, size_t cap, size_t *needed);

/**
 * Real state-space system; A is nx×nx, B nx×nu, C ny×nx, D ny×nu, all row-major.
 */
enum DwStatus dw_system_new(size_t nx,
                            size_t nu,
                            size_t ny,
                            const double *a,
                            const double *b,
                            const double *c,
                            const double *d,
                            struct DwSystem **out_system);

void dw_system_free(struct DwSystem *s);

/**
 * Frequencywise stability of the negative feedback of G and H on the given frequencies
 * (strictly increasing, nonnegative), optionally with ω = ∞.
 */
enum DwStatus dw_stability(const struct DwSystem *g,
                           const struct DwSystem *h,
                           enum DwMethod method,
                           const double *omegas,
                           size_t count,
                           bool include_infinity,
                           size_t mu_points,
                           size_t resolution,
                           struct DwStabilityReport **out_report);

void dw_stability_report_free(struct DwStabilityReport *r);

/**
 * NotCertified for a null handle.
 */
enum DwOverall dw_stability_report_overall(const struct DwStabilityReport *r);

/**
 * Number of per-frequency verdicts.
 */
size_t dw_stability_report_len(const struct DwStabilityReport *r);

/**
 * Report as JSON.
 */
enum DwStatus dw_stability_report_json(const struct DwStabilityReport *r,
                                       char *buf,
                                       size_t cap,
                                       size_t *needed);

/**
 * Eigenloci of G(iω)H(iω), their distance to (−∞, −1] and the winding of det(I + GH).
 */
enum DwStatus dw_nyquist(const struct DwSystem *g,
                         const struct DwSystem *h,
                         const double *omegas,
                         size_t count,
                         bool include_infinity,
                         struct DwNyquistReport **out_report);

void dw_nyquist_report_free(struct DwNyquistReport *r);

double dw_nyquist_min_distance(const struct DwNyquistReport *r);

int64_t dw_nyquist_winding(const struct DwNyquistReport *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DWSHELL_H */
