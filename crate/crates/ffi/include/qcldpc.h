#ifndef QCLDPC_H
#define QCLDPC_H

/* Generated by cbindgen; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Outcome of every fallible call.
 */
typedef enum QcStatus {
  QC_STATUS_OK = 0,
  QC_STATUS_NULL_POINTER = 1,
  QC_STATUS_INVALID_UTF8 = 2,
  QC_STATUS_DOMAIN = 3,
  QC_STATUS_PARSE = 4,
  QC_STATUS_CONSTRUCTION = 5,
  QC_STATUS_LOOKUP = 6,
  QC_STATUS_ESTIMATION = 7,
  QC_STATUS_NON_FINITE = 8,
  QC_STATUS_IO = 9,
  /**
   * The output buffer was too small; the required size was reported.
   */
  QC_STATUS_BUFFER_TOO_SMALL = 10,
  QC_STATUS_PANIC = 11,
} QcStatus;

/**
 * Opaque sparse binary matrix.
 */
typedef struct QcBinary QcBinary;

/**
 * Opaque exponent matrix.
 */
typedef struct QcExponent QcExponent;

/**
 * Opaque weighted graph.
 */
typedef struct QcGraph QcGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, copied into `buf`.
 *
 * # Safety
 * `buf` must hold `cap` bytes; `needed` may be null.
 */
enum QcStatus qc_last_error(char *buf, uintptr_t cap, uintptr_t *needed);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qc_version(void);

/**
 * Parses exponent-matrix text (`m n L` header, `-` for empty cells).
 *
 * # Safety
 * `text` must be NUL-terminated; `dst` must be writable.
 */
enum QcStatus qc_exponent_from_text(const char *text, struct QcExponent **dst);

/**
 * Loads a named fixture that has exponent form.
 *
 * # Safety
 * `name` must be NUL-terminated; `dst` must be writable.
 */
enum QcStatus qc_exponent_from_atlas(const char *name, struct QcExponent **dst);

/**
 * Writes the exponent text form into `buf`.
 *
 * # Safety
 * `e` must be a live handle; `buf` must hold `cap` bytes; `needed` may be null.
 */
enum QcStatus qc_exponent_to_text(const struct QcExponent *e,
                                  char *buf,
                                  uintptr_t cap,
                                  uintptr_t *needed);

/**
 * Girth of the expanded code via the QC cycle condition; 0 if acyclic.
 *
 * # Safety
 * `e` must be a live handle; `girth` must be writable.
 */
enum QcStatus qc_exponent_girth(const struct QcExponent *e, uintptr_t *girth);

/**
 * Expands to the binary parity-check matrix.
 *
 * # Safety
 * `e` must be a live handle; `dst` must be writable.
 */
enum QcStatus qc_exponent_expand(const struct QcExponent *e, struct QcBinary **dst);

/**
 * # Safety
 * `e` must come from this library and not be used afterwards. Null is ignored.
 */
void qc_exponent_free(struct QcExponent *e);

/**
 * Parses alist text.
 *
 * # Safety
 * `text` must be NUL-terminated; `dst` must be writable.
 */
enum QcStatus qc_binary_from_alist(const char *text, struct QcBinary **dst);

/**
 * Dimensions and number of ones.
 *
 * # Safety
 * `h` must be a live handle; outputs must be writable.
 */
enum QcStatus qc_binary_shape(const struct QcBinary *h,
                              uintptr_t *rows,
                              uintptr_t *cols,
                              uintptr_t *nnz);

/**
 * Tanner-graph girth; 0 if acyclic.
 *
 * # Safety
 * `h` must be a live handle; `girth` must be writable.
 */
enum QcStatus qc_binary_girth(const struct QcBinary *h, uintptr_t *girth);

/**
 * Writes alist text into `buf`.
 *
 * # Safety
 * `h` must be a live handle; `buf` must hold `cap` bytes; `needed` may be null.
 */
enum QcStatus qc_binary_to_alist(const struct QcBinary *h,
                                 char *buf,
                                 uintptr_t cap,
                                 uintptr_t *needed);

/**
 * # Safety
 * `h` must come from this library and not be used afterwards. Null is ignored.
 */
void qc_binary_free(struct QcBinary *h);

/**
 * Exact permanent of a row-major `n x n` non-negative matrix (`n <= 20`).
 *
 * # Safety
 * `w` must hold `n * n` doubles; `perm` must be writable.
 */
enum QcStatus qc_permanent_exact(uintptr_t n, const double *w, double *perm);

/**
 * Bethe permanent by damped sum-product belief propagation.
 *
 * # Safety
 * `w` must hold `n * n` doubles; outputs must be writable.
 */
enum QcStatus qc_permanent_bethe(uintptr_t n,
                                 const double *w,
                                 double damping,
                                 double tol,
                                 uintptr_t max_iter,
                                 double *perm,
                                 bool *converged);

/**
 * Graph from parallel edge arrays `(i[k], j[k], J[k])`.
 *
 * # Safety
 * The three arrays must hold `m` entries; `dst` must be writable.
 */
enum QcStatus qc_graph_new(uintptr_t n,
                           uintptr_t m,
                           const uintptr_t *i,
                           const uintptr_t *j,
                           const double *coupling,
                           struct QcGraph **dst);

/**
 * Planted Erdős–Rényi instance with `±1` couplings tilted by `beta_n`.
 *
 * # Safety
 * `dst` must be writable.
 */
enum QcStatus qc_graph_sample_two_point(uintptr_t n,
                                        double avg_degree,
                                        double beta_n,
                                        uint64_t seed,
                                        struct QcGraph **dst);

/**
 * Node and edge counts.
 *
 * # Safety
 * `g` must be a live handle; outputs must be writable.
 */
enum QcStatus qc_graph_size(const struct QcGraph *g, uintptr_t *nodes, uintptr_t *edges);

/**
 * Nishimori inverse temperature from the Bethe-Hessian spectrum.
 *
 * # Safety
 * `g` must be a live handle; `beta` must be writable.
 */
enum QcStatus qc_graph_nishimori(const struct QcGraph *g, double beta_hi, double tol, double *beta);

/**
 * # Safety
 * `g` must come from this library and not be used afterwards. Null is ignored.
 */
void qc_graph_free(struct QcGraph *g);

/**
 * Frobenius error of the best rank-`r` approximation of a row-major
 * `n x n` matrix.
 *
 * # Safety
 * `x` must hold `n * n` doubles; `error` must be writable.
 */
enum QcStatus qc_tsvd_error(uintptr_t n, const double *x, uintptr_t r, double *error);

/**
 * Sparse factorization of a row-major `n x n` matrix with the budgeted
 * masks of `method` (`sf_chord`, `sf_ldpc_peg` or `sf_qc_sa`).
 *
 * # Safety
 * `x` must hold `n * n` doubles; `method` must be NUL-terminated; outputs
 * must be writable.
 */
enum QcStatus qc_sf_factorize(uintptr_t n,
                              const double *x,
                              const char *method,
                              uintptr_t iters,
                              uint64_t seed,
                              double *fnorm_error,
                              uintptr_t *nnz);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QCLDPC_H */
