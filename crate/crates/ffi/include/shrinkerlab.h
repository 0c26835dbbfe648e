#ifndef SHRINKERLAB_H
#define SHRINKERLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum SlabStatus {
  SLAB_STATUS_OK = 0,
  SLAB_STATUS_NULL_POINTER = 1,
  SLAB_STATUS_INVALID_ARGUMENT = 2,
  SLAB_STATUS_DOMAIN = 3,
  SLAB_STATUS_BREAKDOWN = 4,
  SLAB_STATUS_UNSUPPORTED = 5,
  SLAB_STATUS_IO = 6,
  SLAB_STATUS_CONFIG = 7,
  SLAB_STATUS_INTERNAL = 8,
} SlabStatus;

// Integration scheme of a flow handle.
typedef enum SlabScheme {
  SLAB_SCHEME_IMEX_SPECTRAL = 0,
  SLAB_SCHEME_EXPLICIT_RK4 = 1,
} SlabScheme;

// Graph over the standard cylinder `S¹_{√2} × R`.
typedef struct SlabField SlabField;

// A flow: integrator plus current state.
typedef struct SlabFlow SlabFlow;

// Scalar diagnostics of a field.
typedef struct SlabDiagnostics {
  // Rescaled time (0 for a bare field).
  double s;
  // Gaussian area `F`.
  double f;
  // `F − F(cylinder)`.
  double f_gap;
  double phi_l1_ball;
  double phi_l2_ball;
  double phi_l2;
  // `‖𝓜(u)‖`.
  double gradient_norm;
  double u_l2;
} SlabDiagnostics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *slab_version(void);

// Message of the last failure on this thread (empty if none). Valid until
// the next failing call on the same thread.
const char *slab_last_error(void);

// Gaussian area of the standard cylinder, `√(2π/e)`.
double slab_cylinder_f(void);

// Eigenvalue `1 − j²/2 − m/2` (general `k`: `1 − j(j+k−1)/(2k) − m/2`).
double slab_eigenvalue(size_t j, size_t m, size_t k);

// Dimension of the kernel of `L` on `S^k × R^{n−k}`.
//
// # Safety
// `dimension` must be null or point to writable memory.
enum SlabStatus slab_kernel_dimension(size_t k, size_t n, size_t *dimension);

// Zero field on `n_theta × hermite` modes with truncation `L`.
//
// # Safety
// `field` must be null or point to writable memory; the handle written
// there is released with [`slab_field_free`].
enum SlabStatus slab_field_new(size_t n_theta,
                               size_t hermite,
                               double truncation,
                               struct SlabField **field);

// # Safety
// `field` must be null or a handle from [`slab_field_new`] not yet freed.
void slab_field_free(struct SlabField *field);

// Adds `amplitude` times the monic mode `cos(jθ) y^m + …` (`j < 0`: `sin`).
//
// # Safety
// `field` must be a live handle.
enum SlabStatus slab_field_add_mode(struct SlabField *field, int64_t j, size_t m, double amplitude);

// Number of spectral coefficients of the field.
//
// # Safety
// `field` must be a live handle and `len` writable.
enum SlabStatus slab_field_len(const struct SlabField *field, size_t *len);

// Copies the coefficients into `buf`, which must hold `len` values as
// reported by [`slab_field_len`].
//
// # Safety
// `field` must be a live handle and `buf` valid for `len` writes.
enum SlabStatus slab_field_coefficients(const struct SlabField *field, double *buf, size_t len);

// Replaces the coefficients with `len` values from `buf`.
//
// # Safety
// `field` must be a live handle and `buf` valid for `len` reads.
enum SlabStatus slab_field_set_coefficients(struct SlabField *field, const double *buf, size_t len);

// `F`, `φ` norms and `‖𝓜‖` of the graph of the field (balls of radius 10).
//
// # Safety
// `field` must be a live handle and `diag` writable.
enum SlabStatus slab_field_diagnostics(const struct SlabField *field, struct SlabDiagnostics *diag);

// Starts a flow from a copy of `field` with fixed step `dt`.
//
// # Safety
// `field` must be a live handle and `flow` writable; the flow is released
// with [`slab_flow_free`].
enum SlabStatus slab_flow_new(const struct SlabField *field,
                              enum SlabScheme scheme,
                              double dt,
                              int stabilize,
                              struct SlabFlow **flow);

// # Safety
// `flow` must be null or a handle from [`slab_flow_new`] not yet freed.
void slab_flow_free(struct SlabFlow *flow);

// Advances `steps` steps. On a breakdown the flow keeps the last valid state.
//
// # Safety
// `flow` must be a live handle.
enum SlabStatus slab_flow_step(struct SlabFlow *flow, size_t steps);

// Diagnostics of the current state.
//
// # Safety
// `flow` must be a live handle and `diag` writable.
enum SlabStatus slab_flow_diagnostics(const struct SlabFlow *flow, struct SlabDiagnostics *diag);

// Copies the current state into a new field handle.
//
// # Safety
// `flow` must be a live handle and `field` writable.
enum SlabStatus slab_flow_field(const struct SlabFlow *flow, struct SlabField **field);

// Writes the current state as a JSON snapshot.
//
// # Safety
// `flow` must be a live handle and `path` a NUL-terminated string.
enum SlabStatus slab_flow_write_snapshot(const struct SlabFlow *flow, const char *path);

// Runs an experiment (preset name or TOML path) and writes its bundle below
// `out_root`. `passed` receives 1 when every check passed.
//
// # Safety
// `config` and `out_root` must be NUL-terminated strings and `passed` writable.
enum SlabStatus slab_simulate(const char *config, const char *out_root, int *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SHRINKERLAB_H */
