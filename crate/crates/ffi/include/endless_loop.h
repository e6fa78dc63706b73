#ifndef ENDLESS_LOOP_H
#define ENDLESS_LOOP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ElStatus {
  EL_STATUS_OK = 0,
  EL_STATUS_NULL_POINTER = 1,
  EL_STATUS_INVALID_ARGUMENT = 2,
  EL_STATUS_CONFIG = 3,
  EL_STATUS_IO = 4,
  EL_STATUS_DECODE = 5,
  EL_STATUS_STAGE_FAILURE = 6,
  EL_STATUS_SINGULAR = 7,
  EL_STATUS_ENCODE = 8,
  EL_STATUS_BUFFER_TOO_SMALL = 9,
  EL_STATUS_OUT_OF_RANGE = 10,
  EL_STATUS_PANIC = 11,
} ElStatus;

typedef enum ElMode {
  EL_MODE_CRF = 0,
  EL_MODE_UNARY_ONLY = 1,
} ElMode;

typedef struct ElConfig ElConfig;

typedef struct ElImage ElImage;

typedef struct ElLoop ElLoop;

typedef struct ElMask ElMask;

// One suggested direction: unit vector plus its vote weight.
typedef struct ElDirection {
  double x;
  double y;
  double angle_deg;
  double votes;
} ElDirection;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failing call on this thread, or null.
const char *el_last_error_message(void);

// Library version, static string.
const char *el_version(void);

// Build an image from packed 8-bit RGB rows (`stride` bytes apart).
//
// # Safety
// `data` must point to `stride * height` readable bytes.
enum ElStatus el_image_from_rgb8(const uint8_t *data,
                                 size_t width,
                                 size_t height,
                                 size_t stride,
                                 struct ElImage **out);

// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum ElStatus el_image_load(const char *path, struct ElImage **out);

// # Safety
// `image` must be null or a handle from this library, freed at most once.
void el_image_free(struct ElImage *image);

// Build a mask from one byte per pixel; nonzero means inside.
//
// # Safety
// `data` must point to `width * height` readable bytes.
enum ElStatus el_mask_from_u8(const uint8_t *data,
                              size_t width,
                              size_t height,
                              struct ElMask **out);

// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum ElStatus el_mask_load(const char *path, struct ElMask **out);

// # Safety
// `mask` must be null or a handle from this library, freed at most once.
void el_mask_free(struct ElMask *mask);

// Default configuration: direction 0°, 80 frames at 30 fps, CRF solver.
//
// # Safety
// `out` must be writable.
enum ElStatus el_config_new(struct ElConfig **out);

// Parse a JSON configuration; omitted fields take their defaults.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum ElStatus el_config_from_json(const char *json, struct ElConfig **out);

// # Safety
// `config` must be a live handle.
enum ElStatus el_config_set_direction(struct ElConfig *config, double degrees);

// # Safety
// `config` must be a live handle.
enum ElStatus el_config_set_auto_direction(struct ElConfig *config);

// # Safety
// `config` must be a live handle.
enum ElStatus el_config_set_loop(struct ElConfig *config, size_t frames, double fps);

// # Safety
// `config` must be a live handle.
enum ElStatus el_config_set_soft_boundary(struct ElConfig *config, bool soft);

// # Safety
// `config` must be a live handle.
enum ElStatus el_config_set_mode(struct ElConfig *config, enum ElMode mode);

// # Safety
// `config` must be null or a handle from this library, freed at most once.
void el_config_free(struct ElConfig *config);

// Run the whole pipeline. Blocks until the loop is rendered.
//
// # Safety
// Handles must be live; `out` must be writable.
enum ElStatus el_run(const struct ElImage *image,
                     const struct ElMask *mask,
                     const struct ElConfig *config,
                     struct ElLoop **out);

// # Safety
// `lp` must be a live handle or null (returns 0).
size_t el_loop_frame_count(const struct ElLoop *lp);

// # Safety
// `lp` must be a live handle; `width` and `height` writable.
enum ElStatus el_loop_dimensions(const struct ElLoop *lp, size_t *width, size_t *height);

// Copy frame `k` as packed 8-bit RGB (`width * height * 3` bytes).
//
// # Safety
// `buf` must point to `len` writable bytes.
enum ElStatus el_loop_copy_frame_rgb8(const struct ElLoop *lp, size_t k, uint8_t *buf, size_t len);

// # Safety
// `lp` must be a live handle; `path` a NUL-terminated string.
enum ElStatus el_loop_write_gif(const struct ElLoop *lp, const char *path);

// Write numbered PNG frames and `loop.json` into `dir` (created if missing).
//
// # Safety
// `lp` must be a live handle; `dir` a NUL-terminated string.
enum ElStatus el_loop_write_frames(const struct ElLoop *lp, const char *dir);

// # Safety
// `lp` must be null or a handle from this library, freed at most once.
void el_loop_free(struct ElLoop *lp);

// Suggest up to `capacity` motion directions (at most 3). `count` receives
// the number written.
//
// # Safety
// `out` must point to `capacity` writable entries.
enum ElStatus el_suggest_directions(const struct ElImage *image,
                                    struct ElDirection *out,
                                    size_t capacity,
                                    size_t *count);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ENDLESS_LOOP_H */
