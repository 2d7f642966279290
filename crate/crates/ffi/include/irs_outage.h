/* C interface to the irs-outage library. */

#ifndef IRS_OUTAGE_H
#define IRS_OUTAGE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IrsStatus {
  IRS_STATUS_OK = 0,
  IRS_STATUS_NULL_POINTER = 1,
  IRS_STATUS_INVALID_ARGUMENT = 2,
  IRS_STATUS_DIMENSION_MISMATCH = 3,
  IRS_STATUS_DEGENERATE_GEOMETRY = 4,
  IRS_STATUS_EMPTY_SAMPLE_SET = 5,
  IRS_STATUS_INFEASIBLE = 6,
  IRS_STATUS_IO = 7,
  IRS_STATUS_MALFORMED_FILE = 8,
  IRS_STATUS_BUFFER_TOO_SMALL = 9,
  IRS_STATUS_PANIC = 10,
} IrsStatus;

typedef enum IrsMethod {
  // Alternating SGD over the beamformer and the phase shifts.
  IRS_METHOD_PROPOSED = 0,
  // Beamformer SGD with random, fixed phase shifts.
  IRS_METHOD_RANDOM_PHASE = 1,
  // Beamformer SGD on the direct channel only.
  IRS_METHOD_NO_IRS = 2,
} IrsMethod;

// Opaque channel sample set.
typedef struct IrsSampleSet IrsSampleSet;

// Opaque solver output.
typedef struct IrsSolverResult IrsSolverResult;

typedef struct IrsSolverConfig {
  double l_w;
  double l_v;
  double decay;
  // Nonzero decays after every inner step instead of every outer iteration.
  uint8_t decay_per_inner;
  size_t max_outer;
  size_t max_inner;
  double epsilon;
  uint64_t seed;
} IrsSolverConfig;

// Powers in watts, `gamma` linear. `margin_scale <= 0` selects `1 / noise`.
typedef struct IrsSystemParams {
  double power;
  double noise;
  double gamma;
  double margin_scale;
} IrsSystemParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *irs_version(void);

// Message for the last failed call on this thread, empty after a success.
// Valid until the next call into this library from the same thread.
const char *irs_last_error_message(void);

// Full-scale solver defaults (J = 1000, K = 5000).
//
// # Safety
// `out` must be null or point to writable memory for one `IrsSolverConfig`.
enum IrsStatus irs_solver_config_default(struct IrsSolverConfig *out);

// Reduced-scale solver defaults (J = 50, K = 200, l_w = 0.01).
//
// # Safety
// As [`irs_solver_config_default`].
enum IrsStatus irs_solver_config_desk(struct IrsSolverConfig *out);

// Draws `t` samples with `m` antennas and `n` IRS elements on the default
// geometry; the user position and channels both derive from `seed`.
//
// # Safety
// `out` must be null or writable; on success it receives a new handle.
enum IrsStatus irs_sample_set_generate(size_t m,
                                       size_t n,
                                       size_t t,
                                       uint64_t seed,
                                       struct IrsSampleSet **out);

// # Safety
// `path` must be a NUL-terminated string; `out` as in [`irs_sample_set_generate`].
enum IrsStatus irs_sample_set_load(const char *path, struct IrsSampleSet **out);

// # Safety
// `set` must be a live handle; `path` a NUL-terminated string.
enum IrsStatus irs_sample_set_save(const struct IrsSampleSet *set, const char *path);

// Writes `(M, N, T)`; any output pointer may be null.
//
// # Safety
// `set` must be a live handle; non-null outputs must be writable.
enum IrsStatus irs_sample_set_dims(const struct IrsSampleSet *set, size_t *m, size_t *n, size_t *t);

// # Safety
// `set` must be null or a handle not yet freed.
void irs_sample_set_free(struct IrsSampleSet *set);

// Runs `method` on `set`. The starting point derives from `init_seed`,
// sample selection from `config->seed`.
//
// # Safety
// Pointers must be live and valid for their types; `out` receives a new handle.
enum IrsStatus irs_solve(const struct IrsSampleSet *set,
                         const struct IrsSystemParams *params,
                         const struct IrsSolverConfig *config,
                         enum IrsMethod method,
                         uint64_t init_seed,
                         struct IrsSolverResult **out);

// Lengths of the result's `w` (M) and `v` (N, zero for the no-IRS method).
//
// # Safety
// `result` must be a live handle; non-null outputs must be writable.
enum IrsStatus irs_result_dims(const struct IrsSolverResult *result, size_t *m, size_t *n);

// Empirical outage of the returned point on its training set.
//
// # Safety
// `result` must be a live handle; `out` writable.
enum IrsStatus irs_result_outage(const struct IrsSolverResult *result, double *out);

// Copies `w` into `re[0..M]` and `im[0..M]`; `len` is the buffer capacity.
//
// # Safety
// `re` and `im` must each have room for `len` doubles.
enum IrsStatus irs_result_w(const struct IrsSolverResult *result,
                            double *re,
                            double *im,
                            size_t len);

// Copies `v` into `re[0..N]` and `im[0..N]`; `len` is the buffer capacity.
//
// # Safety
// As [`irs_result_w`].
enum IrsStatus irs_result_v(const struct IrsSolverResult *result,
                            double *re,
                            double *im,
                            size_t len);

// # Safety
// `result` must be null or a handle not yet freed.
void irs_result_free(struct IrsSolverResult *result);

// Fraction of samples in `set` in outage under `(w, v)`. Pass `n = 0` and
// null `v` pointers to score a set without its reflected path.
//
// # Safety
// `w_re`/`w_im` must hold `m` doubles, `v_re`/`v_im` `n` doubles.
enum IrsStatus irs_empirical_outage(const struct IrsSampleSet *set,
                                    const struct IrsSystemParams *params,
                                    const double *w_re,
                                    const double *w_im,
                                    size_t m,
                                    const double *v_re,
                                    const double *v_im,
                                    size_t n,
                                    double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IRS_OUTAGE_H */
