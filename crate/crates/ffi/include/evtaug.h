#ifndef EVTAUG_H
#define EVTAUG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define EVT_FORMAT_ATIS_BIN 0

#define EVT_FORMAT_CSV 1

#define EVT_FORMAT_NATIVE 2

#define EVT_PLANE_YT 0

#define EVT_PLANE_XT 1

#define EVT_RASTER_FRAME 0

#define EVT_RASTER_COUNT 1

#define EVT_RASTER_VOXEL 2

/**
 * Result code of every fallible call.
 */
typedef enum EvtStatus {
  EVT_STATUS_OK = 0,
  EVT_STATUS_NULL_POINTER = 1,
  EVT_STATUS_INVALID_ARGUMENT = 2,
  EVT_STATUS_OUT_OF_BOUNDS = 3,
  EVT_STATUS_DECODE = 4,
  EVT_STATUS_ENCODE = 5,
  EVT_STATUS_TRANSFORM = 6,
  EVT_STATUS_RASTER = 7,
  EVT_STATUS_BUFFER_TOO_SMALL = 8,
  EVT_STATUS_PANIC = 99,
} EvtStatus;

/**
 * Opaque dense raster. Values are stored as `f64`, channel-major.
 */
typedef struct EvtRaster EvtRaster;

/**
 * Opaque canonical event stream.
 */
typedef struct EvtStream EvtStream;

/**
 * One event as seen from C.
 */
typedef struct EvtEvent {
  uint16_t y;
  uint16_t x;
  uint64_t t;
  int8_t p;
} EvtEvent;

typedef struct EvtTransformStats {
  uint64_t input_count;
  uint64_t retained_count;
  uint64_t discarded_spatial;
  uint64_t discarded_temporal;
} EvtTransformStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *evt_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *evt_version(void);

/**
 * Builds a canonical stream from `len` events. `events` may be NULL when
 * `len` is 0.
 */
enum EvtStatus evt_stream_new(const struct EvtEvent *events,
                              size_t len,
                              uint16_t width,
                              uint16_t height,
                              struct EvtStream **out);

void evt_stream_free(struct EvtStream *stream);

/**
 * Number of events, or 0 for a NULL handle.
 */
size_t evt_stream_len(const struct EvtStream *stream);

enum EvtStatus evt_stream_geometry(const struct EvtStream *stream,
                                   uint16_t *width,
                                   uint16_t *height);

/**
 * Copies the events into `out` (capacity `cap`). `written` receives the
 * stream length; if `cap` is too small nothing is copied and
 * `EVT_BUFFER_TOO_SMALL` is returned.
 */
enum EvtStatus evt_stream_events(const struct EvtStream *stream,
                                 struct EvtEvent *out,
                                 size_t cap,
                                 size_t *written);

/**
 * Decodes `len` bytes. Pass `width = height = 0` to use the file's own
 * geometry (native) or infer it from the data (bin, csv).
 */
enum EvtStatus evt_decode(const uint8_t *bytes,
                          size_t len,
                          uint32_t format,
                          uint16_t width,
                          uint16_t height,
                          struct EvtStream **out);

/**
 * Encodes a stream into a buffer owned by this library; release it with
 * [`evt_bytes_free`]. An empty encoding yields a NULL buffer and length 0.
 */
enum EvtStatus evt_encode(const struct EvtStream *stream,
                          uint32_t format,
                          uint8_t **out_bytes,
                          size_t *out_len);

void evt_bytes_free(uint8_t *bytes, size_t len);

enum EvtStatus evt_normalize_time(const struct EvtStream *stream, struct EvtStream **out);

/**
 * `(t_max - t_min) / max(width, height)`.
 */
enum EvtStatus evt_default_tau(const struct EvtStream *stream, double *out);

/**
 * Writes the 4x4 VPT matrix row-major into `out[16]`.
 */
enum EvtStatus evt_vpt_matrix(uint32_t plane,
                              double theta,
                              double tau,
                              double center_spatial,
                              double center_time,
                              double *out);

/**
 * Viewpoint transformation. `stats` may be NULL.
 */
enum EvtStatus evt_apply_vpt(const struct EvtStream *stream,
                             uint32_t plane,
                             double theta,
                             double tau,
                             double center_spatial,
                             double center_time,
                             struct EvtStream **out,
                             struct EvtTransformStats *stats);

/**
 * Spatiotemporal stretch; never discards events.
 */
enum EvtStatus evt_apply_sts(const struct EvtStream *stream,
                             uint32_t plane,
                             double theta,
                             double tau,
                             double center_spatial,
                             struct EvtStream **out);

/**
 * Image-plane rotation about `(center_y, center_x)`. `stats` may be NULL.
 */
enum EvtStatus evt_apply_rotation(const struct EvtStream *stream,
                                  double theta,
                                  double center_y,
                                  double center_x,
                                  struct EvtStream **out,
                                  struct EvtTransformStats *stats);

/**
 * Rasterizes a stream. `bins` is used only for voxel grids.
 */
enum EvtStatus evt_rasterize(const struct EvtStream *stream,
                             uint32_t kind,
                             size_t bins,
                             struct EvtRaster **out);

void evt_raster_free(struct EvtRaster *raster);

enum EvtStatus evt_raster_dims(const struct EvtRaster *raster,
                               size_t *channels,
                               size_t *height,
                               size_t *width);

/**
 * Borrowed pointer to `channels * height * width` values, valid until the
 * raster is freed. NULL for a NULL handle.
 */
const double *evt_raster_data(const struct EvtRaster *raster);

enum EvtStatus evt_raster_distance(const struct EvtRaster *a,
                                   const struct EvtRaster *b,
                                   double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EVTAUG_H */
