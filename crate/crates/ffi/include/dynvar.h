#ifndef DYNVAR_H
#define DYNVAR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum DynvarStatus {
  DYNVAR_STATUS_OK = 0,
  DYNVAR_STATUS_NULL_POINTER = 1,
  DYNVAR_STATUS_INVALID_ARGUMENT = 2,
  DYNVAR_STATUS_PARSE_ERROR = 3,
  DYNVAR_STATUS_DOMAIN_VIOLATION = 4,
  DYNVAR_STATUS_NOT_ELLIPTIC = 5,
  DYNVAR_STATUS_NOT_EXACT = 6,
  DYNVAR_STATUS_INTERNAL_INCONSISTENCY = 7,
  DYNVAR_STATUS_NUMERICAL_FAILURE = 8,
  DYNVAR_STATUS_BUFFER_TOO_SMALL = 9,
  DYNVAR_STATUS_PANIC = 10,
} DynvarStatus;

/**
 * A superoperator together with the state it is analyzed against.
 */
typedef struct DynvarGenerator DynvarGenerator;

/**
 * Extracted momentum space and potential.
 */
typedef struct DynvarInvariant DynvarInvariant;

/**
 * A faithful state on `M_n`.
 */
typedef struct DynvarState DynvarState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *dynvar_last_error(void);

/**
 * Build a state from an `n×n` density matrix.
 *
 * # Safety
 * `omega` must point to `2·n·n` doubles; `out` must be writable.
 */
enum DynvarStatus dynvar_state_new(size_t n, const double *omega, struct DynvarState **out);

/**
 * # Safety
 * `state` must come from [`dynvar_state_new`] (or be null) and not be used afterwards.
 */
void dynvar_state_free(struct DynvarState *state);

/**
 * Dimension `n` of the algebra `M_n`, or 0 for a null handle.
 *
 * # Safety
 * `state` must be a live handle or null.
 */
size_t dynvar_state_dim(const struct DynvarState *state);

/**
 * Build a generator from its `n²×n²` matrix on column-stacked vectors.
 *
 * # Safety
 * `state` must be live; `l` must point to `2·n⁴` doubles; `out` writable.
 */
enum DynvarStatus dynvar_generator_new(const struct DynvarState *state,
                                       const double *l,
                                       struct DynvarGenerator **out);

/**
 * Load a generator file. `state_out` may be null; otherwise it receives a
 * new handle for the file's state.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` writable.
 */
enum DynvarStatus dynvar_generator_load(const char *path,
                                        struct DynvarGenerator **out,
                                        struct DynvarState **state_out);

/**
 * # Safety
 * `g` must come from this library (or be null) and not be used afterwards.
 */
void dynvar_generator_free(struct DynvarGenerator *g);

/**
 * Ellipticity, decided by two independent tests which must agree.
 *
 * # Safety
 * `g` must be live and `out` writable.
 */
enum DynvarStatus dynvar_is_elliptic(const struct DynvarGenerator *g, bool *out);

/**
 * # Safety
 * `g` must be live and `out` writable.
 */
enum DynvarStatus dynvar_is_exact(const struct DynvarGenerator *g, bool *out);

/**
 * Extract the momentum space and potential of an exact elliptic generator.
 *
 * # Safety
 * `g` must be live and `out` writable.
 */
enum DynvarStatus dynvar_extract(const struct DynvarGenerator *g, struct DynvarInvariant **out);

/**
 * # Safety
 * `inv` must come from [`dynvar_extract`] (or be null) and not be used afterwards.
 */
void dynvar_invariant_free(struct DynvarInvariant *inv);

/**
 * Dimension of the momentum space, or 0 for a null handle.
 *
 * # Safety
 * `inv` must be live or null.
 */
size_t dynvar_invariant_momentum_dim(const struct DynvarInvariant *inv);

/**
 * Copy the potential `v` (`2·n·n` doubles).
 *
 * # Safety
 * `inv` must be live; `buf` must hold `len` doubles.
 */
enum DynvarStatus dynvar_invariant_potential(const struct DynvarInvariant *inv,
                                             double *buf,
                                             size_t len);

/**
 * Copy momentum `k` of the orthonormal basis (`2·n·n` doubles).
 *
 * # Safety
 * `inv` must be live; `buf` must hold `len` doubles.
 */
enum DynvarStatus dynvar_invariant_momentum(const struct DynvarInvariant *inv,
                                            size_t k,
                                            double *buf,
                                            size_t len);

/**
 * Dimension `n` of the invariant's algebra.
 *
 * # Safety
 * `inv` must be live or null.
 */
size_t dynvar_invariant_n(const struct DynvarInvariant *inv);

/**
 * Write `exp(tL)` (`2·n⁴` doubles).
 *
 * # Safety
 * `g` must be live; `buf` must hold `len` doubles.
 */
enum DynvarStatus dynvar_evolve(const struct DynvarGenerator *g, double t, double *buf, size_t len);

/**
 * Run the full analysis of a generator file and return the JSON report.
 * `exit_code` receives the command-line exit code for the same analysis.
 * Free the string with [`dynvar_string_free`].
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` and `exit_code` writable.
 */
enum DynvarStatus dynvar_analyze_json(const char *path, char **out, int *exit_code);

/**
 * # Safety
 * `s` must come from this library (or be null) and not be used afterwards.
 */
void dynvar_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DYNVAR_H */
