#ifndef MOVELIKE_H
#define MOVELIKE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Call outcome. The nonzero input/processing/io values match the CLI exit codes.
 */
typedef enum MlStatus {
  ML_STATUS_OK = 0,
  ML_STATUS_INVALID_INPUT = 2,
  ML_STATUS_PROCESSING = 3,
  ML_STATUS_IO = 4,
  ML_STATUS_NULL_POINTER = 10,
  ML_STATUS_PANIC = 11,
} MlStatus;

/**
 * Pipeline configuration.
 */
typedef struct MlConfig MlConfig;

/**
 * RGBA image.
 */
typedef struct MlImage MlImage;

/**
 * Driving keypoint sequence.
 */
typedef struct MlSequence MlSequence;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failed call on this thread, or null after a
 * success. Valid until the next call on the same thread.
 */
const char *ml_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ml_version(void);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum MlStatus ml_image_load_png(const char *path, struct MlImage **out);

/**
 * Build an image from `width * height * 4` bytes of row-major RGBA.
 *
 * # Safety
 * `data` must point to `len` readable bytes; `out` must be writable.
 */
enum MlStatus ml_image_from_rgba8(size_t width,
                                  size_t height,
                                  const uint8_t *data,
                                  size_t len,
                                  struct MlImage **out);

/**
 * # Safety
 * `img` must be null or a live handle.
 */
size_t ml_image_width(const struct MlImage *img);

/**
 * # Safety
 * `img` must be null or a live handle.
 */
size_t ml_image_height(const struct MlImage *img);

/**
 * # Safety
 * `img` must be null or a handle not yet freed.
 */
void ml_image_free(struct MlImage *img);

/**
 * Default configuration.
 */
struct MlConfig *ml_config_default(void);

/**
 * Parse a JSON configuration; unknown keys and violated invariants are rejected.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum MlStatus ml_config_from_json(const char *json, struct MlConfig **out);

/**
 * # Safety
 * `cfg` must be null or a handle not yet freed.
 */
void ml_config_free(struct MlConfig *cfg);

/**
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum MlStatus ml_sequence_from_json(const char *json, struct MlSequence **out);

/**
 * # Safety
 * `seq` must be null or a live handle.
 */
size_t ml_sequence_frame_count(const struct MlSequence *seq);

/**
 * # Safety
 * `seq` must be null or a handle not yet freed.
 */
void ml_sequence_free(struct MlSequence *seq);

/**
 * Run the whole pipeline and return the animation as GIF bytes, whatever the
 * configured output kind. Release the bytes with [`ml_bytes_free`].
 *
 * # Safety
 * Handles must be live; `out_data` and `out_len` must be writable.
 */
enum MlStatus ml_run_pipeline(const struct MlImage *img,
                              const struct MlSequence *seq,
                              const struct MlConfig *cfg,
                              uint8_t **out_data,
                              size_t *out_len);

/**
 * # Safety
 * `data` and `len` must come from one successful [`ml_run_pipeline`] call, or `data` must be null.
 */
void ml_bytes_free(uint8_t *data, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MOVELIKE_H */
