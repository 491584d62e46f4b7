/* C interface to the stablekern library.
 *
 * Objects are opaque handles released with the matching *_free function.
 * Every fallible call returns an sk_status; on failure a description is
 * available from sk_last_error_message() on the same thread. Output handles
 * are only written on success. Matrix and band indices are 1-based.
 */
#ifndef STABLEKERN_H
#define STABLEKERN_H

#include <stddef.h>

#if defined(STABLEKERN_BUILDING_LIBRARY)
#define SK_API __attribute__((visibility("default")))
#else
#define SK_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sk_status {
    SK_OK = 0,
    SK_ERR_PARAMETER_DOMAIN = 1,
    SK_ERR_DIMENSION = 2,
    SK_ERR_SINGULAR_OPERATOR = 3,
    SK_ERR_FACTORIZATION = 4,
    SK_ERR_CONDITIONING = 5,
    SK_ERR_INFEASIBLE_EXTENSION = 6,
    SK_ERR_DECOMPOSITION = 7,
    SK_ERR_OPTIMIZATION_FAILURE = 8,
    SK_ERR_DEGENERATE_SYSTEM = 9,
    SK_ERR_DEGENERATE_REFERENCE = 10,
    SK_ERR_LENGTH = 11,
    SK_ERR_IO = 12,
    SK_ERR_PARSE = 13,
    SK_ERR_INVALID_ARGUMENT = 14,
    SK_ERR_INTERNAL = 15
} sk_status;

typedef struct sk_spec sk_spec;
typedef struct sk_matrix sk_matrix;
typedef struct sk_bands sk_bands;
typedef struct sk_dataset sk_dataset;
typedef struct sk_estimate sk_estimate;
typedef struct sk_mc_result sk_mc_result;
typedef struct sk_psd sk_psd;

SK_API const char* sk_status_name(sk_status status);
/* Message of the last failed call on this thread; "" if none. */
SK_API const char* sk_last_error_message(void);
/* Releases strings returned through char** parameters. */
SK_API void sk_string_free(char* s);

/* ---- kernel specifications ---- */

/* Flat key-value text, e.g. "family=TC2 beta=0.8". */
SK_API sk_status sk_spec_parse(const char* text, sk_spec** out);
/* Family label ("DI", "TC", "DC", "SS", "TC3", "DC2", "HF1", "HC2", "TCd", ...)
 * plus parameters; pass NaN (or delta <= 0) to keep a parameter's default. */
SK_API sk_status sk_spec_from_label(const char* label, double beta, double alpha, int delta, double gamma,
                                    sk_spec** out);
SK_API sk_status sk_spec_to_string(const sk_spec* spec, char** out);
SK_API sk_status sk_spec_label(const sk_spec* spec, char** out);
SK_API void sk_spec_free(sk_spec* spec);

/* ---- kernel core ---- */

SK_API sk_status sk_kernel_build(const sk_spec* spec, size_t dim, sk_matrix** out);
SK_API sk_status sk_kernel_inverse(const sk_spec* spec, size_t dim, sk_matrix** out);
/* Lower-triangular L with L L^T = K^{-1}, plus log det K (either output may be NULL). */
SK_API sk_status sk_kernel_inverse_cholesky(const sk_spec* spec, size_t dim, sk_matrix** factor, double* logdet_k);
SK_API sk_status sk_kernel_logdet(const sk_spec* spec, size_t dim, double* out);
SK_API sk_status sk_kernel_kappa(const sk_spec* spec, double* out);
/* Bandwidth of K^{-1}; -1 when the inverse is dense (SS). */
SK_API sk_status sk_kernel_inverse_bandwidth(const sk_spec* spec, int* out);

/* ---- dense matrices ---- */

/* Copies a row-major array. */
SK_API sk_status sk_matrix_from_rows(const double* values, size_t rows, size_t cols, sk_matrix** out);
SK_API size_t sk_matrix_rows(const sk_matrix* m);
SK_API size_t sk_matrix_cols(const sk_matrix* m);
SK_API sk_status sk_matrix_get(const sk_matrix* m, size_t row, size_t col, double* out);
/* Row-major copy into buf, which must hold rows * cols values. */
SK_API sk_status sk_matrix_copy(const sk_matrix* m, double* buf, size_t len);
/* path NULL writes to stdout. */
SK_API sk_status sk_matrix_write_csv(const sk_matrix* m, const char* path);
SK_API sk_status sk_matrix_max_abs_diff(const sk_matrix* a, const sk_matrix* b, double* out);
SK_API void sk_matrix_free(sk_matrix* m);

/* ---- band extension ---- */

SK_API sk_status sk_bands_from_matrix(const sk_matrix* m, size_t bandwidth, sk_bands** out);
SK_API sk_status sk_bands_read_csv(const char* path, sk_bands** out);
SK_API sk_status sk_bands_write_csv(const sk_bands* bands, const char* path);
SK_API size_t sk_bands_dim(const sk_bands* bands);
SK_API size_t sk_bands_bandwidth(const sk_bands* bands);
/* Adds delta to the (t, s) and (s, t) entries. */
SK_API sk_status sk_bands_perturb(sk_bands* bands, size_t t, size_t s, double delta);
/* first_failure receives the 1-based index of the first non-positive-definite
 * sliding block, 0 when feasible. */
SK_API sk_status sk_bands_check_feasibility(const sk_bands* bands, int* feasible, size_t* first_failure);
SK_API sk_status sk_maxent_complete(const sk_bands* bands, sk_matrix** out, double* entropy);
SK_API void sk_bands_free(sk_bands* bands);

/* ---- estimation ---- */

SK_API sk_status sk_dataset_read_csv(const char* path, sk_dataset** out);
SK_API sk_status sk_dataset_from_arrays(const double* u, const double* y, size_t n, sk_dataset** out);
/* A positive value fixes the noise variance; NaN restores estimation. */
SK_API sk_status sk_dataset_set_sigma2(sk_dataset* data, double sigma2);
SK_API size_t sk_dataset_size(const sk_dataset* data);
SK_API void sk_dataset_free(sk_dataset* data);

/* Marginal-likelihood fit of the family in `family_template` with impulse length dim. */
SK_API sk_status sk_fit(const sk_dataset* data, const sk_spec* family_template, size_t dim, sk_estimate** out);
SK_API sk_status sk_estimate_to_json(const sk_estimate* est, char** out);
SK_API sk_status sk_estimate_spec(const sk_estimate* est, sk_spec** out);
SK_API double sk_estimate_lambda(const sk_estimate* est);
SK_API double sk_estimate_sigma2(const sk_estimate* est);
SK_API double sk_estimate_nll(const sk_estimate* est);
SK_API size_t sk_estimate_dim(const sk_estimate* est);
SK_API sk_status sk_estimate_g_hat(const sk_estimate* est, double* buf, size_t len);
SK_API void sk_estimate_free(sk_estimate* est);

/* ---- Monte Carlo studies ---- */

/* JSON object; see the README for keys. NULL or "{}" runs the defaults. */
SK_API sk_status sk_mc_run(const char* config_json, sk_mc_result** out);
SK_API sk_status sk_mc_write_csv(const sk_mc_result* result, const char* path);
/* One line per estimator: "<label> median_airf=<v> ok=<n> failed=<n>". */
SK_API sk_status sk_mc_summary(const sk_mc_result* result, char** out);
SK_API sk_status sk_mc_median(const sk_mc_result* result, const char* label, double* out);
SK_API sk_status sk_mc_counts(const sk_mc_result* result, size_t* succeeded, size_t* failed);
SK_API void sk_mc_free(sk_mc_result* result);

/* ---- spectra ---- */

/* Stationary part of the kernel at dimension dim, then its PSD on grid points.
 * dim 0 picks the smallest length >= 200 at which the truncated lags are negligible. */
SK_API sk_status sk_psd_compute(const sk_spec* spec, size_t dim, size_t grid, int normalize, sk_psd** out);
SK_API sk_status sk_stationary_spread(const sk_spec* spec, size_t dim, double* out);
SK_API size_t sk_psd_size(const sk_psd* psd);
/* index runs 0 .. size - 1 */
SK_API sk_status sk_psd_get(const sk_psd* psd, size_t index, double* theta, double* phi);
SK_API sk_status sk_psd_write_csv(const sk_psd* psd, const char* path);
SK_API sk_status sk_psd_low_frequency_mass(const sk_psd* psd, double cutoff, double* out);
SK_API void sk_psd_free(sk_psd* psd);

#ifdef __cplusplus
}
#endif

#endif
