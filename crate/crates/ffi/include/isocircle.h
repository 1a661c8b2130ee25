/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef ISOCIRCLE_H
#define ISOCIRCLE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum IcStatus {
  IC_STATUS_OK = 0,
  IC_STATUS_NULL_POINTER = 1,
  IC_STATUS_INVALID_ARGUMENT = 2,
  IC_STATUS_IO = 3,
  IC_STATUS_OUT_OF_RANGE = 4,
  IC_STATUS_PANIC = 5,
} IcStatus;

typedef enum IcStrategy {
  IC_STRATEGY_ITS = 0,
  IC_STRATEGY_THREE_POINT = 1,
  IC_STRATEGY_FOUR_POINT = 2,
} IcStrategy;

// Detections of one run, in canonical order, plus its counters.
typedef struct IcDetections IcDetections;

// Grayscale image with intensities in [0, 1].
typedef struct IcImage IcImage;

// Flat mirror of the detector configuration. `d_cap <= 0` means no cap.
typedef struct IcConfig {
  double sigma;
  uint32_t ksize;
  double smooth_sigma;
  double canny_low;
  double canny_high;
  double delta_k;
  double delta_p;
  double t_r;
  double d_min;
  double d0;
  double d_cap;
  double delta_d;
  double align_min;
  uint32_t n_sectors;
  double min_votes_ratio;
  double r_min;
  uint32_t cluster_min_members;
  double iteration_budget_factor;
  uint32_t min_segment;
  enum IcStrategy strategy;
  uint64_t seed;
} IcConfig;

typedef struct IcCircle {
  double a;
  double b;
  double r;
  uint32_t votes;
  uint32_t n_sectors;
  double completeness;
  // Edge points that supported validation.
  uint32_t support;
} IcCircle;

typedef struct IcStats {
  uint64_t edge_pixels;
  uint64_t segments;
  uint64_t budget;
  uint64_t iterations;
  uint64_t pairs_accepted;
  uint64_t rejected_too_close;
  uint64_t rejected_not_isosceles;
  uint64_t rejected_parallel;
  uint64_t rejected_no_intersection;
  uint64_t rejected_collinear;
  uint64_t rejected_fourth_point;
  uint64_t rejected_radius;
  uint64_t clusters_created;
  uint64_t candidates_refined;
  uint64_t candidates_validated;
  uint64_t candidates_rejected;
} IcStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failed call on this thread, or NULL. The
// pointer stays valid until the next call into this library on the same
// thread.
const char *ic_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *ic_version(void);

// Writes the default configuration to `out`.
//
// # Safety
// `out` must be NULL or valid for writing one `IcConfig`.
enum IcStatus ic_config_default(struct IcConfig *out);

// Builds an image from 8-bit gray rows `stride` bytes apart (`stride` 0
// means tightly packed).
//
// # Safety
// `data` must point to `height` rows of `stride` bytes (at least `width`
// readable in each); `out` must be valid for writing one pointer.
enum IcStatus ic_image_from_gray8(size_t width,
                                  size_t height,
                                  const uint8_t *data,
                                  size_t stride,
                                  struct IcImage **out);

// Loads a PNG or binary PGM file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be valid for writing
// one pointer.
enum IcStatus ic_image_load(const char *path, struct IcImage **out);

// # Safety
// `img` must be NULL or a live handle from this library.
size_t ic_image_width(const struct IcImage *img);

// # Safety
// `img` must be NULL or a live handle from this library.
size_t ic_image_height(const struct IcImage *img);

// # Safety
// `img` must be NULL or a handle from this library not yet freed.
void ic_image_free(struct IcImage *img);

// Detects circles in `img`. A NULL `config` uses the defaults.
//
// # Safety
// `img` must be a live image handle, `config` NULL or a valid `IcConfig`,
// and `out` valid for writing one pointer.
enum IcStatus ic_detect(const struct IcImage *img,
                        const struct IcConfig *config,
                        struct IcDetections **out);

// # Safety
// `d` must be NULL or a live result handle.
size_t ic_detections_len(const struct IcDetections *d);

// Copies detection `index` to `out`.
//
// # Safety
// `d` must be a live result handle and `out` valid for writing one `IcCircle`.
enum IcStatus ic_detections_get(const struct IcDetections *d, size_t index, struct IcCircle *out);

// Copies the run's counters to `out`.
//
// # Safety
// `d` must be a live result handle and `out` valid for writing one `IcStats`.
enum IcStatus ic_detections_stats(const struct IcDetections *d, struct IcStats *out);

// # Safety
// `d` must be NULL or a result handle not yet freed.
void ic_detections_free(struct IcDetections *d);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ISOCIRCLE_H */
