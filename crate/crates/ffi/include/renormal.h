#ifndef RENORMAL_H
#define RENORMAL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible entry point.
 */
typedef enum RnStatus {
  RN_OK = 0,
  /**
   * A required pointer argument was null.
   */
  RN_NULL_POINTER = 1,
  /**
   * A string argument was not valid UTF-8, or a length did not match.
   */
  RN_INVALID_ARGUMENT = 2,
  /**
   * Malformed configuration or unknown preset.
   */
  RN_CONFIG = 3,
  /**
   * A numerical precondition failed (resolution, CFL, exponent range).
   */
  RN_NUMERICAL = 4,
  /**
   * File system or serialization failure.
   */
  RN_IO = 5,
  /**
   * The library panicked; the handle arguments are left untouched.
   */
  RN_PANIC = 6,
} RnStatus;

/**
 * Scalar grid field on the periodic torus.
 */
typedef struct RnField RnField;

/**
 * Sampled, normalized mollifier kernel.
 */
typedef struct RnKernel RnKernel;

/**
 * Result of a config-driven experiment.
 */
typedef struct RnReport RnReport;

/**
 * Noise coefficient matrix field.
 */
typedef struct RnSigma RnSigma;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failure on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *rn_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rn_version(void);

/**
 * Copies `len` values (`len` must equal `n^d`) into a new field.
 *
 * # Safety
 * `values` must point to `len` readable doubles; `out` must be writable.
 */
enum RnStatus rn_field_new(size_t d,
                           size_t n,
                           const double *values,
                           size_t len,
                           struct RnField **out_field);

/**
 * Builds a field from a named preset such as `"box-indicator 0.25 0.75"`.
 *
 * # Safety
 * `preset` must be a NUL-terminated string; `out` must be writable.
 */
enum RnStatus rn_field_from_preset(size_t d,
                                   size_t n,
                                   const char *preset,
                                   uint64_t seed,
                                   struct RnField **out_field);

/**
 * Number of grid values, `n^d`. Returns 0 for a null handle.
 *
 * # Safety
 * `field` must be null or a live handle.
 */
size_t rn_field_len(const struct RnField *field);

/**
 * Copies the field values (row-major, last axis fastest) into `buf`.
 *
 * # Safety
 * `buf` must have room for `len` doubles.
 */
enum RnStatus rn_field_values(const struct RnField *field, double *buf, size_t len);

/**
 * # Safety
 * `field` must be null or a handle not yet freed.
 */
void rn_field_free(struct RnField *field);

/**
 * Builds `σ` with `m` noise columns from a named preset (`"trig"`,
 * `"constant 0.5"`, `"fourier-decay 2"`, `"divergence-free"`).
 *
 * # Safety
 * `preset` must be a NUL-terminated string; `out` must be writable.
 */
enum RnStatus rn_sigma_from_preset(size_t d,
                                   size_t n,
                                   size_t m,
                                   const char *preset,
                                   uint64_t seed,
                                   struct RnSigma **out_sigma);

/**
 * # Safety
 * `sigma` must be null or a handle not yet freed.
 */
void rn_sigma_free(struct RnSigma *sigma);

/**
 * Samples a kernel (`"bump"` or `"truncated-gaussian"`) of width `delta`.
 *
 * # Safety
 * `kind` must be a NUL-terminated string; `out` must be writable.
 */
enum RnStatus rn_kernel_new(const char *kind,
                            double delta,
                            size_t d,
                            size_t n,
                            struct RnKernel **out_kernel);

/**
 * # Safety
 * `kernel` must be null or a handle not yet freed.
 */
void rn_kernel_free(struct RnKernel *kernel);

/**
 * Discrete `L^q` norm; `q <= 0` or infinite gives the maximum norm.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum RnStatus rn_lq_norm(const struct RnField *field, double q, double *out_norm);

/**
 * `J_δ * f` as a new field.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum RnStatus rn_mollify(const struct RnField *field,
                         const struct RnKernel *kernel,
                         struct RnField **out_field);

/**
 * `L^q` norm of the vector field `E2 = J K u - K J u`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum RnStatus rn_e2_norm(const struct RnSigma *sigma,
                         const struct RnField *u,
                         const struct RnKernel *kernel,
                         double q,
                         double *out_norm);

/**
 * The double commutator `[[K, J], K] u` as a new field.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum RnStatus rn_double_commutator(const struct RnSigma *sigma,
                                   const struct RnField *u,
                                   const struct RnKernel *kernel,
                                   struct RnField **out_field);

/**
 * Runs the experiment described by a TOML config file. Nothing is written
 * to disk unless the config sets an output directory.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum RnStatus rn_run_config(const char *path, struct RnReport **out_report);

/**
 * 1 for pass, 2 for a degenerate pass, 0 for fail, -1 for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
int32_t rn_report_verdict(const struct RnReport *report);

/**
 * The report as JSON. Release the string with [`rn_string_free`].
 *
 * # Safety
 * `report` must be live; `out` must be writable.
 */
enum RnStatus rn_report_json(const struct RnReport *report, char **out_json);

/**
 * # Safety
 * `report` must be null or a handle not yet freed.
 */
void rn_report_free(struct RnReport *report);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void rn_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RENORMAL_H */
