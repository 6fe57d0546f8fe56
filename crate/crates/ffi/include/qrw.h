#ifndef QRW_H
#define QRW_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

#define QRW_OK 0

/**
 * A required pointer argument was null.
 */
#define QRW_ERR_NULL 1

/**
 * Malformed input: bad JSON, inconsistent dimensions, invalid data.
 */
#define QRW_ERR_INPUT 2

/**
 * Dimension budget or series truncation cap exceeded.
 */
#define QRW_ERR_BUDGET 3

/**
 * A Rust panic was caught at the boundary.
 */
#define QRW_ERR_PANIC 4

#define QRW_VACUUM 0

#define QRW_IDENTITY 1

/**
 * A generator φ: B(ℂ^{d_h}) → B(ℂ^{d_h} ⊗ k̂).
 */
typedef struct QrwGenerator QrwGenerator;

/**
 * An exponential-vector label u ⊗ ε(f).
 */
typedef struct QrwLabel QrwLabel;

/**
 * Result of a convergence sweep.
 */
typedef struct QrwSweepReport QrwSweepReport;

typedef struct QrwComplex {
  double re;
  double im;
} QrwComplex;

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *qrw_last_error(void);

/**
 * Parses a generator descriptor (`{"kind": ...}`); `seed` fills in a missing
 * seed for `random_gksl`.
 *
 * # Safety
 * `json` must be a nul-terminated string and `out` a valid pointer to writable
 * storage for one handle.
 */
int32_t qrw_generator_from_json(const char *json, uint64_t seed, struct QrwGenerator **out);

/**
 * The scalar example: the walk generator at step `h` if `h > 0`, the
 * identity-adapted limit generator θ otherwise.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
int32_t qrw_generator_example7(double c, double h, struct QrwGenerator **out);

/**
 * # Safety
 * `gen` must be a live handle; `d_h` and `d_k` must be valid writable pointers.
 */
int32_t qrw_generator_dims(const struct QrwGenerator *gen, uintptr_t *d_h, uintptr_t *d_k);

/**
 * # Safety
 * `gen` must be null or a handle from this library that has not been freed.
 */
void qrw_generator_free(struct QrwGenerator *gen);

/**
 * Builds the label u ⊗ ε(f) with u ∈ ℂ^{d_h} and f a ℂ^{d_k}-valued step
 * function: value `values[p·d_k .. (p+1)·d_k]` on
 * `[breakpoints[p], breakpoints[p+1])`, the last piece ending at
 * `support_end`. `pieces = 0` gives f = 0.
 *
 * # Safety
 * `u` must point to `d_h` values, `breakpoints` to `pieces` values and
 * `values` to `pieces·d_k` values; `out` must be valid for one handle.
 */
int32_t qrw_label_new(const struct QrwComplex *u,
                      uintptr_t d_h,
                      uintptr_t d_k,
                      const double *breakpoints,
                      const struct QrwComplex *values,
                      uintptr_t pieces,
                      double support_end,
                      struct QrwLabel **out);

/**
 * # Safety
 * `label` must be null or a handle from this library that has not been freed.
 */
void qrw_label_free(struct QrwLabel *label);

/**
 * ⟨v ε(g), J_t(a) u ε(f)⟩ for the walk of `phi` at step `h`, with
 * `adaptedness` `QRW_VACUUM` or `QRW_IDENTITY`. `a` is d_h×d_h, row-major.
 *
 * # Safety
 * Handles must be live, `a` must point to d_h² values and `out` must be writable.
 */
int32_t qrw_walk_element(const struct QrwGenerator *phi,
                         double h,
                         double t,
                         int32_t adaptedness,
                         const struct QrwComplex *a,
                         const struct QrwLabel *bra,
                         const struct QrwLabel *ket,
                         struct QrwComplex *out);

/**
 * ⟨v ε(g), j_t(a) u ε(f)⟩ for the vacuum-adapted cocycle of `psi`
 * (`QRW_VACUUM`) or the identity-adapted cocycle of `theta` (`QRW_IDENTITY`).
 *
 * # Safety
 * Handles must be live, `a` must point to d_h² values and `out` must be writable.
 */
int32_t qrw_cocycle_element(const struct QrwGenerator *gen,
                            double t,
                            int32_t adaptedness,
                            const struct QrwComplex *a,
                            const struct QrwLabel *bra,
                            const struct QrwLabel *ket,
                            struct QrwComplex *out);

/**
 * Runs a convergence sweep from a JSON config (the `converge` schema).
 *
 * # Safety
 * `config_json` must be a nul-terminated string and `out` valid for one handle.
 */
int32_t qrw_sweep_run(const char *config_json, uint64_t seed, struct QrwSweepReport **out);

/**
 * 1 if the sweep passed, 0 if not, -1 for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
int32_t qrw_sweep_passed(const struct QrwSweepReport *report);

/**
 * Number of step sizes in the sweep (0 for a null handle).
 *
 * # Safety
 * `report` must be null or a live handle.
 */
uintptr_t qrw_sweep_len(const struct QrwSweepReport *report);

/**
 * Step size and sup error of entry `i`.
 *
 * # Safety
 * `report` must be a live handle; `h` and `sup` must be writable.
 */
int32_t qrw_sweep_sup(const struct QrwSweepReport *report, uintptr_t i, double *h, double *sup);

/**
 * The sweep as CSV; release the string with [`qrw_string_free`].
 *
 * # Safety
 * `report` must be a live handle and `out` writable.
 */
int32_t qrw_sweep_csv(const struct QrwSweepReport *report, char **out);

/**
 * The sweep as JSON; release the string with [`qrw_string_free`].
 *
 * # Safety
 * `report` must be a live handle and `out` writable.
 */
int32_t qrw_sweep_json(const struct QrwSweepReport *report, char **out);

/**
 * # Safety
 * `report` must be null or a handle from this library that has not been freed.
 */
void qrw_sweep_free(struct QrwSweepReport *report);

/**
 * # Safety
 * `s` must be null or a string returned by this library that has not been freed.
 */
void qrw_string_free(char *s);

#endif  /* QRW_H */
