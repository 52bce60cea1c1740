#ifndef SCARLAB_H
#define SCARLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/*
 Result code of every call.
 */
typedef enum ScarlabStatus {
  SCARLAB_STATUS_OK = 0,
  SCARLAB_STATUS_NULL_POINTER = 1,
  SCARLAB_STATUS_INVALID_ARGUMENT = 2,
  SCARLAB_STATUS_BUFFER_TOO_SMALL = 3,
  SCARLAB_STATUS_NUMERICAL = 4,
  SCARLAB_STATUS_PANIC = 5,
} ScarlabStatus;

/*
 Opaque model handle.
 */
typedef struct ScarlabModel ScarlabModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Builds the model for a ring of `length` sites (even, 4..=24) and stores a
 new handle in `*out`. Release it with `scarlab_model_free`.

 # Safety
 `out` must be null or valid for writing one pointer.
 */
enum ScarlabStatus scarlab_model_new(size_t length, struct ScarlabModel **out);

/*
 Releases a handle. Null is ignored.

 # Safety
 `model` must be null or a handle from `scarlab_model_new` not yet freed.
 */
void scarlab_model_free(struct ScarlabModel *model);

/*
 Ring length and sector dimension.

 # Safety
 `model` must be a live handle; outputs must be null or writable.
 */
enum ScarlabStatus scarlab_model_dimension(const struct ScarlabModel *model,
                                           size_t *length,
                                           size_t *dim);

/*
 Basis configurations as bit patterns (bit `i` = site `i` up), in index order.

 # Safety
 `model` must be a live handle; `buf` must hold `capacity` elements.
 */
enum ScarlabStatus scarlab_model_states(const struct ScarlabModel *model,
                                        uint32_t *buf,
                                        size_t capacity,
                                        size_t *written);

/*
 Eigenvalues of `H_0` (and of every `H_g`), ascending.

 # Safety
 `model` must be a live handle; `buf` must hold `capacity` elements.
 */
enum ScarlabStatus scarlab_model_energies(const struct ScarlabModel *model,
                                          double *buf,
                                          size_t capacity,
                                          size_t *written);

/*
 Eigenvector indices of the scar tower, ascending.

 # Safety
 `model` must be a live handle; `buf` must hold `capacity` elements.
 */
enum ScarlabStatus scarlab_scar_indices(const struct ScarlabModel *model,
                                        size_t *buf,
                                        size_t capacity,
                                        size_t *written);

/*
 Largest entrywise deviation of `V H_0 V⁻¹` from `H_g`.

 # Safety
 `model` must be a live handle; `out` must be writable.
 */
enum ScarlabStatus scarlab_similarity_residual(const struct ScarlabModel *model,
                                               double g,
                                               double *out);

/*
 Néel return probabilities from `|ℤ̄₂⟩` under `H_g` at `n_times` times.
 Each output array must hold `n_times` values; `log_norm_sq` may be null.

 # Safety
 `model` must be a live handle; `times` must hold `n_times` values and the
 non-null outputs must be writable for `n_times` values.
 */
enum ScarlabStatus scarlab_evolve_neel(const struct ScarlabModel *model,
                                       double g,
                                       const double *times,
                                       size_t n_times,
                                       double *p_z2,
                                       double *p_z2bar,
                                       double *log_norm_sq);

/*
 Up-spin distribution `p_N` (N = 0..=L/2) of right eigenvector `alpha` of `H_g`.

 # Safety
 `model` must be a live handle; `buf` must hold `capacity` elements.
 */
enum ScarlabStatus scarlab_p_nup(const struct ScarlabModel *model,
                                 double g,
                                 size_t alpha,
                                 double *buf,
                                 size_t capacity,
                                 size_t *written);

/*
 Half-ring entanglement entropy (bits) of right eigenvector `alpha` of
 `H_g`, for the cut covering sites `cut_start .. cut_start + L/2`.

 # Safety
 `model` must be a live handle; `out` must be writable.
 */
enum ScarlabStatus scarlab_entropy(const struct ScarlabModel *model,
                                   double g,
                                   size_t alpha,
                                   size_t cut_start,
                                   double *out);

/*
 Copies the calling thread's last error message (NUL-terminated, truncated
 to fit) into `buf` and returns the full message length without the NUL.
 Returns 0 when the last call succeeded.

 # Safety
 `buf` must be null or writable for `capacity` bytes.
 */
size_t scarlab_last_error_message(char *buf, size_t capacity);

/*
 Static description of a status code.
 */
const char *scarlab_status_string(enum ScarlabStatus status);

/*
 Library version, NUL-terminated.
 */
const char *scarlab_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCARLAB_H */
