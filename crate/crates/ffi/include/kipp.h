#ifndef KIPP_H
#define KIPP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum KippStatus {
  KIPP_STATUS_OK = 0,
  KIPP_STATUS_NULL_POINTER = 1,
  /**
   * Malformed input or an argument outside its domain.
   */
  KIPP_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Valid input that violates a precondition (wrong shape, not a partial isometry, ...).
   */
  KIPP_STATUS_PRECONDITION = 3,
  KIPP_STATUS_PANIC = 4,
} KippStatus;

/**
 * Opaque complex square matrix.
 */
typedef struct KippMatrix KippMatrix;

/**
 * Opaque homogeneous polynomial in `x, y, z`.
 */
typedef struct KippPoly KippPoly;

/**
 * Disc fit of the support function: `h(theta) = radius + Re(e^{-i theta} center)`.
 */
typedef struct KippDiscFit {
  double center_re;
  double center_im;
  double radius;
  double residual;
} KippDiscFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * Valid until the next call into the library on the same thread.
 */
const char *kipp_last_error(void);

/**
 * Builds a `dim x dim` matrix from row-major real and imaginary parts.
 *
 * # Safety
 * `re` and `im` must point to `dim * dim` doubles; `out` must be writable.
 */
enum KippStatus kipp_matrix_new(size_t dim,
                                const double *re,
                                const double *im,
                                struct KippMatrix **out);

/**
 * Parses the shared JSON matrix format.
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` must be writable.
 */
enum KippStatus kipp_matrix_from_json(const char *json, struct KippMatrix **out);

/**
 * Serializes a matrix to the shared JSON format.
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
enum KippStatus kipp_matrix_to_json(const struct KippMatrix *m, char **out);

/**
 * # Safety
 * `m` must be null or a handle not yet freed.
 */
void kipp_matrix_free(struct KippMatrix *m);

/**
 * Dimension of a matrix; 0 for a null handle.
 *
 * # Safety
 * `m` must be null or a live handle.
 */
size_t kipp_matrix_dim(const struct KippMatrix *m);

/**
 * Reads entry `(i, j)`.
 *
 * # Safety
 * `m` must be a live handle; `re` and `im` must be writable.
 */
enum KippStatus kipp_matrix_get(const struct KippMatrix *m,
                                size_t i,
                                size_t j,
                                double *re,
                                double *im);

/**
 * Ones on the superdiagonal, `n >= 2`.
 *
 * # Safety
 * `out` must be writable.
 */
enum KippStatus kipp_jordan_shift(size_t n, struct KippMatrix **out);

/**
 * The `S_5` partial isometry with eigenvalues `{a, a, 0, b, c}`.
 *
 * # Safety
 * `out` must be writable.
 */
enum KippStatus kipp_s5_family(double a,
                               double b_re,
                               double b_im,
                               double c_re,
                               double c_im,
                               struct KippMatrix **out);

/**
 * Seeded random `n x n` partial isometry with kernel dimension `m`.
 *
 * # Safety
 * `out` must be writable.
 */
enum KippStatus kipp_random_partial_isometry(size_t n,
                                             size_t m,
                                             uint64_t seed,
                                             struct KippMatrix **out);

/**
 * Kippenhahn polynomial `det(x Re A + y Im A + z I)`.
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
enum KippStatus kipp_poly_det(const struct KippMatrix *m, struct KippPoly **out);

/**
 * # Safety
 * `p` must be null or a handle not yet freed.
 */
void kipp_poly_free(struct KippPoly *p);

/**
 * Total degree; 0 for a null handle.
 *
 * # Safety
 * `p` must be null or a live handle.
 */
size_t kipp_poly_degree(const struct KippPoly *p);

/**
 * Coefficient of `x^i y^j z^k`; 0 when `i + j + k` differs from the degree.
 *
 * # Safety
 * `p` must be a live handle.
 */
double kipp_poly_coeff(const struct KippPoly *p, size_t i, size_t j, size_t k);

/**
 * Serializes a polynomial to its JSON term list.
 *
 * # Safety
 * `p` must be a live handle; `out` must be writable.
 */
enum KippStatus kipp_poly_to_json(const struct KippPoly *p, char **out);

/**
 * Releases a string returned by the library.
 *
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void kipp_string_free(char *s);

/**
 * Support function: largest eigenvalue of `Re(e^{-i theta} A)`.
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
enum KippStatus kipp_support_function(const struct KippMatrix *m, double theta, double *out);

/**
 * Least-squares disc fit of the support function over `samples` angles.
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
enum KippStatus kipp_fit_disc(const struct KippMatrix *m, size_t samples, struct KippDiscFit *out);

/**
 * Whether `‖A A* A - A‖_F <= tol`.
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
enum KippStatus kipp_is_partial_isometry(const struct KippMatrix *m, double tol, bool *out);

/**
 * Curve classification of a 5x5 matrix with disc fit and condition
 * reports, as JSON.
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
enum KippStatus kipp_classify_json(const struct KippMatrix *m,
                                   double tol,
                                   size_t samples,
                                   char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KIPP_H */
