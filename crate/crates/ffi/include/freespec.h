#ifndef FREESPEC_H
#define FREESPEC_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FsStatus {
  FS_STATUS_OK = 0,
  FS_STATUS_NULL_POINTER = 1,
  FS_STATUS_INVALID = 2,
  FS_STATUS_DIMENSION = 3,
  FS_STATUS_NO_CONVERGENCE = 4,
  FS_STATUS_MEMORY_CAP = 5,
  FS_STATUS_IO = 6,
  FS_STATUS_UTF8 = 7,
  FS_STATUS_BUFFER_TOO_SMALL = 8,
  FS_STATUS_PANIC = 9,
} FsStatus;

/**
 * Opaque block model specification.
 */
typedef struct FsBlockSpec FsBlockSpec;

/**
 * Opaque Gaussian series model X = A0 + Σ A_i g_i.
 */
typedef struct FsModel FsModel;

typedef struct FsParameters {
  double sigma;
  double v;
  double sigma_star;
  double v_tilde;
} FsParameters;

typedef struct FsPhaseReport {
  double snr;
  double lambda;
  double lambda0;
  double error_radius;
  double kappa;
  /**
   * 'a', 'b' or 'c'.
   */
  char phase;
  bool consistent;
} FsPhaseReport;

typedef struct FsScovValues {
  double s;
  double h_plus;
  double h_minus;
} FsScovValues;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next call into the library from the same thread.
 */
const char *fs_last_error_message(void);

/**
 * Static, NUL-terminated version string.
 */
const char *fs_version(void);

/**
 * Parse a model from its JSON form. On success `*out` owns a new handle.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FsStatus fs_model_from_json(const char *json, struct FsModel **out);

/**
 * The scalar semicircular model (d = 1).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum FsStatus fs_model_semicircle(struct FsModel **out);

/**
 * # Safety
 * `model` must be null or a handle from this library not yet freed.
 */
void fs_model_free(struct FsModel *model);

/**
 * Dimension d, or 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t fs_model_dim(const struct FsModel *model);

/**
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum FsStatus fs_model_parameters(const struct FsModel *model, struct FsParameters *out);

/**
 * λmax and λmin of the free model.
 *
 * # Safety
 * `model` must be a live handle; `lo` and `hi` valid pointers.
 */
enum FsStatus fs_model_free_edges(const struct FsModel *model, double *lo, double *hi);

/**
 * Free density at `steps + 1` equispaced points of [xlo, xhi], written to
 * `density`, which must hold `len ≥ steps + 1` values.
 *
 * # Safety
 * `model` must be a live handle and `density` point to `len` doubles.
 */
enum FsStatus fs_model_free_density(const struct FsModel *model,
                                    double xlo,
                                    double xhi,
                                    size_t steps,
                                    double eta,
                                    double *density,
                                    size_t len);

/**
 * One draw of X, row-major, real and imaginary parts in separate
 * buffers of `len ≥ d²` values each. `im` may be null for real models.
 *
 * # Safety
 * `model` must be a live handle, `re` (and `im` if non-null) point to
 * `len` doubles.
 */
enum FsStatus fs_model_sample(const struct FsModel *model,
                              uint64_t seed,
                              double *re,
                              double *im,
                              size_t len);

/**
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FsStatus fs_block_from_json(const char *json, struct FsBlockSpec **out);

/**
 * # Safety
 * `spec` must be null or a live handle.
 */
void fs_block_free(struct FsBlockSpec *spec);

/**
 * # Safety
 * `spec` must be a live handle and `out` a valid pointer.
 */
enum FsStatus fs_block_phase(const struct FsBlockSpec *spec, struct FsPhaseReport *out);

/**
 * B(θ) and the overlap (1 − 1/θ²)₊; either output may be null.
 *
 * # Safety
 * Non-null outputs must be valid pointers.
 */
enum FsStatus fs_bbp(double theta, double *value, double *overlap);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum FsStatus fs_scov_limits(double lambda, double delta, struct FsScovValues *out);

/**
 * Run a sweep config (JSON) on `threads` workers (0: all cores) and
 * return the CSV in `*csv`, to be released with `fs_string_free`.
 *
 * # Safety
 * `config` must be a NUL-terminated string and `csv` a valid pointer.
 */
enum FsStatus fs_simulate(const char *config, size_t threads, char **csv);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void fs_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FREESPEC_H */
