#ifndef IEM_H
#define IEM_H

/* Generated by cbindgen from iem-ffi; do not edit by hand. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result of every fallible call.
 */
typedef enum IemStatus {
  IemStatus_Ok = 0,
  IemStatus_NullPointer = 1,
  IemStatus_InvalidArgument = 2,
  IemStatus_RuntimeError = 3,
} IemStatus;

/**
 * Objective variant selector.
 */
typedef enum IemObjective {
  IemObjective_L1Mask = 0,
  IemObjective_L2Mask = 1,
  IemObjective_L1ImgL1 = 2,
  IemObjective_L2ImgL2 = 3,
} IemObjective;

/**
 * Opaque image handle (unit-normalized, channel-major internally).
 */
typedef struct IemImage IemImage;

/**
 * Opaque binary mask handle.
 */
typedef struct IemMask IemMask;

/**
 * Opaque configuration handle; starts from the default parameters.
 */
typedef struct IemOptions IemOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *iem_last_error_message(void);

/**
 * Library version as a static C string.
 */
const char *iem_version(void);

/**
 * Builds an image from 8-bit pixels in row-major, channel-interleaved
 * order (`height * width * channels` bytes); values are scaled by 255.
 * `channels` must be 1 or 3.
 *
 * # Safety
 * `pixels` must point to at least `height * width * channels` readable
 * bytes and `out` must be a valid destination pointer.
 */
enum IemStatus iem_image_create(const uint8_t *pixels,
                                size_t channels,
                                size_t height,
                                size_t width,
                                struct IemImage **out);

/**
 * # Safety
 * `image` must be null or a pointer from [`iem_image_create`], not yet
 * freed.
 */
void iem_image_free(struct IemImage *image);

/**
 * Creates an options handle holding the default configuration.
 *
 * # Safety
 * `out` must be a valid destination pointer.
 */
enum IemStatus iem_options_create(struct IemOptions **out);

/**
 * # Safety
 * `options` must be null or a pointer from [`iem_options_create`], not
 * yet freed.
 */
void iem_options_free(struct IemOptions *options);

/**
 * # Safety
 * `options` must be a live handle from [`iem_options_create`].
 */
enum IemStatus iem_options_set_iterations(struct IemOptions *options, size_t iterations);

/**
 * # Safety
 * `options` must be a live handle from [`iem_options_create`].
 */
enum IemStatus iem_options_set_lambda(struct IemOptions *options, double lambda);

/**
 * # Safety
 * `options` must be a live handle from [`iem_options_create`].
 */
enum IemStatus iem_options_set_kernel(struct IemOptions *options,
                                      size_t size,
                                      double sigma,
                                      bool stacked);

/**
 * Replaces the square initialization sizes.
 *
 * # Safety
 * `options` must be a live handle and `sizes` must point to `count`
 * readable values.
 */
enum IemStatus iem_options_set_init_sizes(struct IemOptions *options,
                                          const size_t *sizes,
                                          size_t count);

/**
 * # Safety
 * `options` must be a live handle from [`iem_options_create`].
 */
enum IemStatus iem_options_set_objective(struct IemOptions *options, enum IemObjective objective);

/**
 * # Safety
 * `options` must be a live handle from [`iem_options_create`].
 */
enum IemStatus iem_options_set_toggles(struct IemOptions *options,
                                       bool regularizer,
                                       bool smoothing,
                                       bool boundary_restricted);

/**
 * # Safety
 * `options` must be a live handle from [`iem_options_create`].
 */
enum IemStatus iem_options_set_strict_iterations(struct IemOptions *options, bool strict);

/**
 * Side length images are resized and center-cropped to before the
 * greedy search.
 *
 * # Safety
 * `options` must be a live handle from [`iem_options_create`].
 */
enum IemStatus iem_options_set_target_size(struct IemOptions *options, size_t target_size);

/**
 * Preprocesses the image and runs the greedy search from every
 * configured initialization, returning the selected mask. `options`
 * may be null for the default configuration.
 *
 * # Safety
 * `image` must be a live handle, `options` null or a live handle, and
 * `out` a valid destination pointer.
 */
enum IemStatus iem_segment(const struct IemImage *image,
                           const struct IemOptions *options,
                           struct IemMask **out);

/**
 * # Safety
 * `mask` must be null or a live handle from [`iem_segment`].
 */
size_t iem_mask_height(const struct IemMask *mask);

/**
 * # Safety
 * `mask` must be null or a live handle from [`iem_segment`].
 */
size_t iem_mask_width(const struct IemMask *mask);

/**
 * Copies the mask into `buffer` as row-major 0/1 bytes.
 *
 * # Safety
 * `mask` must be a live handle and `buffer` must hold at least `len`
 * writable bytes, with `len >= height * width`.
 */
enum IemStatus iem_mask_copy(const struct IemMask *mask, uint8_t *buffer, size_t len);

/**
 * # Safety
 * `mask` must be null or a pointer from [`iem_segment`], not yet freed.
 */
void iem_mask_free(struct IemMask *mask);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IEM_H */
