#ifndef NFEM_H
#define NFEM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes. Values 2, 3 and 5 match the command-line exit codes.
typedef enum NfemStatus {
  NFEM_STATUS_OK = 0,
  // Numerical failure (overflow, degenerate system, non-finite values).
  NFEM_STATUS_FAILURE = 1,
  NFEM_STATUS_CONFIG = 2,
  NFEM_STATUS_DATA_FORMAT = 3,
  NFEM_STATUS_UNSUPPORTED_GEOMETRY = 5,
  NFEM_STATUS_NULL_POINTER = 6,
  NFEM_STATUS_INVALID_ARGUMENT = 7,
  NFEM_STATUS_IO = 8,
  // A Rust panic was caught at the boundary.
  NFEM_STATUS_PANIC = 9,
  // Output buffer too small; the required length was still written.
  NFEM_STATUS_BUFFER_TOO_SMALL = 10,
} NfemStatus;

// Near-field data set (matrix, measurement grid, wavenumber).
typedef struct NfemData NfemData;

// Factorized data ready for sampling.
typedef struct NfemSolver NfemSolver;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *nfem_version(void);

// Copies the calling thread's last error message into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length excluding the NUL, or
// 0 when no error was recorded.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t nfem_last_error_message(char *buf, size_t len);

// Reads an NFEM1 file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum NfemStatus nfem_data_read(const char *path, struct NfemData **out);

// Writes `data` as an NFEM1 file.
//
// # Safety
// `data` must come from this library; `path` must be a NUL-terminated string.
enum NfemStatus nfem_data_write(const struct NfemData *data, const char *path);

// Synthesizes data for the concentric-sphere configuration in `config_path`.
// Noise from the config is applied when `noisy` is nonzero.
//
// # Safety
// `config_path` must be a NUL-terminated string; `out` must be writable.
enum NfemStatus nfem_data_simulate(const char *config_path, int noisy, struct NfemData **out);

// Wraps externally computed data, e.g. from a finite-element solver.
//
// `nodes` holds `n_nodes` records `(theta, phi, weight)`; `entries` holds the
// `2 n_nodes x 2 n_nodes` matrix row-major as interleaved `(re, im)` pairs,
// with rows and columns ordered `(node, tangent)` using the library's
// `e_theta, e_phi` frame.
//
// # Safety
// `nodes` must hold `3 n_nodes` doubles and `entries` `8 n_nodes^2` doubles.
enum NfemStatus nfem_data_from_raw(double k,
                                   double radius,
                                   size_t n_nodes,
                                   const double *nodes,
                                   const double *entries,
                                   struct NfemData **out);

// Number of measurement nodes, 0 for a null handle.
//
// # Safety
// `data` must be null or come from this library.
size_t nfem_data_node_count(const struct NfemData *data);

// Wavenumber of the data, NaN for a null handle.
//
// # Safety
// `data` must be null or come from this library.
double nfem_data_wavenumber(const struct NfemData *data);

// `||S - S^T||_F / ||S||_F`, NaN for a null handle.
//
// # Safety
// `data` must be null or come from this library.
double nfem_data_symmetry_defect(const struct NfemData *data);

// # Safety
// `data` must be null or come from this library and not be used afterwards.
void nfem_data_free(struct NfemData *data);

// Factorizes `data`. The solver does not borrow `data`.
//
// # Safety
// `data` must come from this library; `out` must be writable.
enum NfemStatus nfem_solver_new(const struct NfemData *data, struct NfemSolver **out);

// Largest singular value of the weighted matrix, NaN for a null handle.
//
// # Safety
// `solver` must be null or come from this library.
double nfem_solver_norm(const struct NfemSolver *solver);

// Unnormalized indicator `1 / ||g_z||` and the Morozov parameter at `z`.
//
// # Safety
// `z` and `polarization` must point to 3 doubles; outputs may be null.
enum NfemStatus nfem_solver_indicator(const struct NfemSolver *solver,
                                      const double *z,
                                      const double *polarization,
                                      double noise_level,
                                      double *out_indicator,
                                      double *out_alpha);

// Normalized `log10 I` over the lattice `box_min..box_max` with the given
// spacing, x fastest; masked points (`|z| <= mask_radius`) are 0.
//
// The point count is always written to `out_len`. With `out_log10` null or
// `capacity` too small nothing is computed and `BufferTooSmall` is returned,
// so a first call with a null buffer queries the size.
//
// # Safety
// `box_min`, `box_max`, `polarization` must point to 3 doubles; `out_log10`
// must be null or valid for `capacity` doubles; `out_len` must be writable.
enum NfemStatus nfem_solver_image(const struct NfemSolver *solver,
                                  const double *box_min,
                                  const double *box_max,
                                  double spacing,
                                  double mask_radius,
                                  const double *polarization,
                                  double noise_level,
                                  double *out_log10,
                                  size_t capacity,
                                  size_t *out_len);

// # Safety
// `solver` must be null or come from this library and not be used afterwards.
void nfem_solver_free(struct NfemSolver *solver);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NFEM_H */
