#ifndef BLOWUP_LAB_H
#define BLOWUP_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum BlEquation {
  BL_EQUATION_BORN_INFELD = 0,
  BL_EQUATION_RADIAL_MEMBRANE = 1,
  BL_EQUATION_SPACELIKE = 2,
  BL_EQUATION_DIVERGENCE_FORM = 3,
  BL_EQUATION_EIKONAL = 4,
} BlEquation;

typedef enum BlFamily {
  BL_FAMILY_BORN_INFELD_LOG = 0,
  BL_FAMILY_SPHERE_PLUS = 1,
  BL_FAMILY_SPHERE_MINUS = 2,
  BL_FAMILY_SPACELIKE_LOG_CLAIMED = 3,
  BL_FAMILY_SPACELIKE_ARCTAN_CORRECTED = 4,
  BL_FAMILY_CONSTANT_PROFILE = 5,
} BlFamily;

typedef enum BlStatus {
  BL_STATUS_OK = 0,
  BL_STATUS_NULL_POINTER = 1,
  BL_STATUS_INVALID_ARGUMENT = 2,
  BL_STATUS_DOMAIN = 3,
  BL_STATUS_DEGENERATE = 4,
  BL_STATUS_NUMERICAL = 5,
  BL_STATUS_CONFIG = 6,
  BL_STATUS_UTF8 = 7,
  BL_STATUS_NOT_RUN = 8,
  BL_STATUS_PANIC = 9,
} BlStatus;

/**
 * Opaque evolution, configured on creation and run on demand.
 */
typedef struct BlEvolution BlEvolution;

/**
 * Opaque closed-form solution.
 */
typedef struct BlSolution BlSolution;

/**
 * Value and derivatives up to second order in `(a, b)`.
 */
typedef struct BlJet {
  double value;
  double da;
  double db;
  double daa;
  double dab;
  double dbb;
} BlJet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if none.
 * The pointer stays valid until the next failing call on this thread.
 */
const char *bl_last_error_message(void);

/**
 * # Safety
 * `s` must come from this library (`bl_audit_json`) and not be freed yet.
 */
void bl_string_free(char *s);

/**
 * # Safety
 * `out` must be a valid pointer to a `BlSolution *`.
 */
enum BlStatus bl_solution_new(enum BlFamily family,
                              double blowup_time,
                              double k,
                              struct BlSolution **out);

/**
 * # Safety
 * `h` must come from `bl_solution_new` and not be freed yet, or be null.
 */
void bl_solution_free(struct BlSolution *h);

/**
 * # Safety
 * `h` must be a live solution handle and `out` a valid `double *`.
 */
enum BlStatus bl_solution_value(const struct BlSolution *h, double a, double b, double *out);

/**
 * # Safety
 * `h` must be a live solution handle and `out` a valid `BlJet *`.
 */
enum BlStatus bl_solution_jet(const struct BlSolution *h, double a, double b, struct BlJet *out);

/**
 * Residual of `equation` on the solution at `(a, b)`; the radial membrane
 * uses its axis limit at `b = 0`.
 *
 * # Safety
 * `h` must be a live solution handle and `out` a valid `double *`.
 */
enum BlStatus bl_solution_residual(const struct BlSolution *h,
                                   enum BlEquation equation,
                                   double a,
                                   double b,
                                   double *out);

/**
 * Builds an evolution from `key=value` config text.
 *
 * # Safety
 * `config` must be a NUL-terminated string and `out` a valid `BlEvolution **`.
 */
enum BlStatus bl_evolution_new(const char *config, struct BlEvolution **out);

/**
 * # Safety
 * `h` must come from `bl_evolution_new` and not be freed yet, or be null.
 */
void bl_evolution_free(struct BlEvolution *h);

/**
 * Runs to a stop condition. Running again restarts from the initial data.
 *
 * # Safety
 * `h` must be a live evolution handle.
 */
enum BlStatus bl_evolution_run(struct BlEvolution *h);

/**
 * Final time, step count and sup error against the closed form (NaN when
 * the data did not come from one).
 *
 * # Safety
 * `h` must be a live evolution handle; each out pointer valid or null.
 */
enum BlStatus bl_evolution_summary(const struct BlEvolution *h,
                                   double *t_final,
                                   size_t *steps,
                                   double *sup_error);

/**
 * Copies up to `cap` values of `u` on the active nodes into `buf` and
 * writes the active node count to `len`.
 *
 * # Safety
 * `buf` must hold `cap` doubles (or be null with `cap = 0`); `len` valid.
 */
enum BlStatus bl_evolution_copy_u(const struct BlEvolution *h,
                                  double *buf,
                                  size_t cap,
                                  size_t *len);

/**
 * Log-log fit of `|u_x(t, 0)|` against `1 / (T - t)` over `[lo, hi]`.
 *
 * # Safety
 * `h` must be a live evolution handle; out pointers valid.
 */
enum BlStatus bl_evolution_fit_blowup(const struct BlEvolution *h,
                                      double lo,
                                      double hi,
                                      double *exponent,
                                      double *amplitude);

/**
 * Relative drift of the flux-corrected momentum; NaN when undefined.
 *
 * # Safety
 * `h` must be a live evolution handle and `out` valid.
 */
enum BlStatus bl_evolution_momentum_drift(const struct BlEvolution *h, double *out);

/**
 * Roots of the mode quadratic, larger first.
 *
 * # Safety
 * `out` must point to two writable doubles.
 */
enum BlStatus bl_mode_roots(double *out);

/**
 * Runs the claims audit. `json` receives a string to release with
 * `bl_string_free`; `all_expected` (may be null) receives 1 when every
 * claim reproduced its expected verdict.
 *
 * # Safety
 * `json` must be a valid `char **`; `all_expected` valid or null.
 */
enum BlStatus bl_audit_json(char **json, int32_t *all_expected);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BLOWUP_LAB_H */
