#ifndef RADON_AD_H
#define RADON_AD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum RadStatus {
  RAD_STATUS_OK = 0,
  RAD_STATUS_NULL_POINTER = 1,
  RAD_STATUS_INVALID_UTF8 = 2,
  RAD_STATUS_CONFIG = 3,
  RAD_STATUS_DIMENSION = 4,
  RAD_STATUS_INVALID_INPUT = 5,
  RAD_STATUS_PARSE = 6,
  RAD_STATUS_IO = 7,
  RAD_STATUS_SCHEMA_VERSION = 8,
  RAD_STATUS_NO_CONVERGENCE = 9,
  /**
   * A Rust panic was caught at the boundary.
   */
  RAD_STATUS_INTERNAL = 10,
} RadStatus;

/**
 * Opaque fitted model.
 */
typedef struct RadDetector RadDetector;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Fits a model on `n_series` series of `channels` channels; `lengths[i]` is
 * the length of series `i`. `config_json` is a flat JSON config object (may
 * be null for defaults). Its `model_kind` selects series, collective or
 * regressor models.
 *
 * # Safety
 * Buffers must be valid for the sizes implied by the arguments; `out` must
 * be writable. The handle is released with [`rad_detector_free`].
 */
enum RadStatus rad_detector_fit(const double *values,
                                const size_t *lengths,
                                size_t n_series,
                                size_t channels,
                                const char *config_json,
                                struct RadDetector **out);

/**
 * Parses a model from its JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
enum RadStatus rad_detector_from_json(const char *json, struct RadDetector **out);

/**
 * Loads a model file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum RadStatus rad_detector_load(const char *path, struct RadDetector **out);

/**
 * Writes the model file.
 *
 * # Safety
 * `det` must come from this library; `path` must be NUL-terminated.
 */
enum RadStatus rad_detector_save(const struct RadDetector *det, const char *path);

/**
 * Serializes the model; free the string with [`rad_string_free`].
 *
 * # Safety
 * `det` must come from this library and `out` be writable.
 */
enum RadStatus rad_detector_to_json(const struct RadDetector *det, char **out);

/**
 * Length of the model's feature vectors (`N_P · N_B`).
 *
 * # Safety
 * `det` must come from this library and `out` be writable.
 */
enum RadStatus rad_detector_feature_dim(const struct RadDetector *det, size_t *out);

/**
 * Anomaly score of one series of `len × channels` values.
 *
 * # Safety
 * `values` must hold `len * channels` doubles; `out` must be writable.
 */
enum RadStatus rad_detector_score(const struct RadDetector *det,
                                  const double *values,
                                  size_t len,
                                  size_t channels,
                                  double *out);

/**
 * Per-point scores of one series; writes `len` values to `out`. Needs a
 * collective or regressor model. Positions a regressor cannot score get 0.
 *
 * # Safety
 * `values` must hold `len * channels` doubles and `out` room for `len`.
 */
enum RadStatus rad_detector_score_points(const struct RadDetector *det,
                                         const double *values,
                                         size_t len,
                                         size_t channels,
                                         double *out);

/**
 * Rank-based ROC-AUC of `n` scores with 0/1 labels.
 *
 * # Safety
 * `scores` and `labels` must hold `n` entries; `out` must be writable.
 */
enum RadStatus rad_roc_auc(const double *scores, const uint8_t *labels, size_t n, double *out);

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *rad_last_error_message(void);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void rad_string_free(char *s);

/**
 * # Safety
 * `det` must come from this library or be null; it is invalid afterwards.
 */
void rad_detector_free(struct RadDetector *det);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RADON_AD_H */
