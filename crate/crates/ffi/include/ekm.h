#ifndef EKM_H
#define EKM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum EkmStatus {
  EKM_STATUS_OK = 0,
  EKM_STATUS_NULL_POINTER = 1,
  EKM_STATUS_INVALID_ARGUMENT = 2,
  EKM_STATUS_DATA_ERROR = 3,
  EKM_STATUS_INFEASIBLE = 4,
  EKM_STATUS_BUFFER_TOO_SMALL = 5,
  EKM_STATUS_INTERNAL = 6,
} EkmStatus;

/**
 * Opaque dataset handle.
 */
typedef struct EkmDataset EkmDataset;

/**
 * Opaque solution handle.
 */
typedef struct EkmSolution EkmSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next call on the same thread.
 */
const char *ekm_last_error_message(void);

/**
 * Copies `n * d` row-major values into a new dataset.
 *
 * # Safety
 * `data` must point to `n * d` readable doubles; `out` must be writable.
 */
enum EkmStatus ekm_dataset_from_rows(const double *data,
                                     size_t n,
                                     size_t d,
                                     struct EkmDataset **out);

/**
 * Loads a numeric CSV file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum EkmStatus ekm_dataset_from_csv(const char *path,
                                    bool has_header,
                                    uint8_t delimiter,
                                    struct EkmDataset **out);

/**
 * # Safety
 * `ds` must be NULL or a live handle from this library.
 */
size_t ekm_dataset_n(const struct EkmDataset *ds);

/**
 * # Safety
 * `ds` must be NULL or a live handle from this library.
 */
size_t ekm_dataset_d(const struct EkmDataset *ds);

/**
 * # Safety
 * `ds` must be NULL or a handle not yet freed.
 */
void ekm_dataset_free(struct EkmDataset *ds);

/**
 * Clusters `ds` into `k` medoids.
 *
 * `algorithm` is one of "ekm", "oracle", "pam", "fasterpam", "clarans";
 * `metric` one of "sqeuclidean", "euclidean", "manhattan". NULL selects
 * "ekm" and "sqeuclidean" respectively. `seed` only affects the randomized
 * baselines.
 *
 * # Safety
 * `ds` must be a live handle; string arguments NULL or NUL-terminated;
 * `out` writable.
 */
enum EkmStatus ekm_solve(const struct EkmDataset *ds,
                         size_t k,
                         const char *algorithm,
                         const char *metric,
                         uint64_t seed,
                         bool standardize_features,
                         struct EkmSolution **out);

/**
 * # Safety
 * `sol` must be NULL or a live handle.
 */
double ekm_solution_objective(const struct EkmSolution *sol);

/**
 * Number of medoids.
 *
 * # Safety
 * `sol` must be NULL or a live handle.
 */
size_t ekm_solution_k(const struct EkmSolution *sol);

/**
 * Number of clustered points.
 *
 * # Safety
 * `sol` must be NULL or a live handle.
 */
size_t ekm_solution_n(const struct EkmSolution *sol);

/**
 * # Safety
 * `sol` must be NULL or a live handle.
 */
uint64_t ekm_solution_evaluated_configurations(const struct EkmSolution *sol);

/**
 * # Safety
 * `sol` must be NULL or a live handle.
 */
double ekm_solution_wall_time_seconds(const struct EkmSolution *sol);

/**
 * Copies the ascending medoid indices into `buf` (capacity `cap`).
 *
 * # Safety
 * `sol` must be a live handle and `buf` writable for `cap` elements.
 */
enum EkmStatus ekm_solution_medoids(const struct EkmSolution *sol, size_t *buf, size_t cap);

/**
 * Copies, for every point, the position of its medoid within the medoid
 * list (a cluster label in `0..k`) into `buf`.
 *
 * # Safety
 * `sol` must be a live handle and `buf` writable for `cap` elements.
 */
enum EkmStatus ekm_solution_assignment(const struct EkmSolution *sol, size_t *buf, size_t cap);

/**
 * # Safety
 * `sol` must be NULL or a handle not yet freed.
 */
void ekm_solution_free(struct EkmSolution *sol);

/**
 * Colex rank of a strictly increasing index set.
 *
 * # Safety
 * `indices` must hold `k` readable elements; `out` must be writable.
 */
enum EkmStatus ekm_rank_colex(const size_t *indices, size_t k, uint64_t *out);

/**
 * Writes the `k`-subset with colex rank `rank` into `out`.
 *
 * # Safety
 * `out` must be writable for `k` elements.
 */
enum EkmStatus ekm_unrank_colex(uint64_t rank, size_t k, size_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EKM_H */
