#ifndef FILTERED_SPECTRA_H
#define FILTERED_SPECTRA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FsStatus {
  FS_STATUS_OK = 0,
  FS_STATUS_NULL_POINTER = 1,
  FS_STATUS_INVALID_UTF8 = 2,
  FS_STATUS_INVALID_INPUT = 3,
  FS_STATUS_PARSE = 4,
  FS_STATUS_KERNEL_INVALID = 5,
  FS_STATUS_NON_CONVERGENCE = 6,
  FS_STATUS_BUFFER_TOO_SMALL = 7,
  FS_STATUS_INTERNAL = 8,
  FS_STATUS_PANIC = 9,
} FsStatus;

// Opaque kernel handle.
typedef struct FsKernel FsKernel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failing call on this thread, or NULL.
// The pointer stays valid until the next failing call on this thread.
const char *fs_last_error(void);

// Library version as a static NUL-terminated string.
const char *fs_version(void);

// Builds and validates a kernel from a JSON filter or kernel document.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a writable pointer.
enum FsStatus fs_kernel_from_json(const char *json, struct FsKernel **out);

// Releases a handle. NULL is ignored.
//
// # Safety
// `k` must come from [`fs_kernel_from_json`] and not have been freed.
void fs_kernel_free(struct FsKernel *k);

// Spectral radius bound `A = 2 sqrt(sup s)`, or NaN for NULL.
//
// # Safety
// `k` must be a live handle or NULL.
double fs_kernel_a_bound(const struct FsKernel *k);

// Writes `m_1..m_kmax` into `out[0..kmax]`.
//
// # Safety
// `k` must be a live handle and `out` must have room for `len` doubles.
enum FsStatus fs_theoretical_moments(const struct FsKernel *k,
                                     uintptr_t kmax,
                                     double *out,
                                     uintptr_t len);

// Stieltjes transform `S(lambda)` for any non-real `lambda`, or real `lambda` outside `[-A, A]`.
//
// # Safety
// `k` must be a live handle; `s_re` and `s_im` must be writable.
enum FsStatus fs_stieltjes(const struct FsKernel *k,
                           double re,
                           double im,
                           double *s_re,
                           double *s_im);

// Density at `xs[0..n]` by Stieltjes inversion at heights `eps1 > eps2 > 0`.
// Points where the solver failed are written as NaN and reported as
// `FS_STATUS_NON_CONVERGENCE` after the whole grid has been filled.
//
// # Safety
// `k` must be a live handle; `xs` and `out` must each hold `n` doubles.
enum FsStatus fs_density(const struct FsKernel *k,
                         const double *xs,
                         uintptr_t n,
                         double eps1,
                         double eps2,
                         double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FILTERED_SPECTRA_H */
