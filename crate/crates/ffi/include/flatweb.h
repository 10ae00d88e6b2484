#ifndef FLATWEB_H
#define FLATWEB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FwStatus {
  FW_STATUS_OK = 0,
  FW_STATUS_NULL_POINTER = 1,
  FW_STATUS_INVALID_UTF8 = 2,
  FW_STATUS_PARSE = 3,
  FW_STATUS_INVALID_ARGUMENT = 4,
  FW_STATUS_WRONG_VARIANT = 5,
  FW_STATUS_DOMAIN = 6,
  FW_STATUS_NOT_REGULAR = 7,
  FW_STATUS_ALL_EXCLUDED = 8,
  FW_STATUS_NUMERICAL = 9,
  FW_STATUS_PANIC = 10,
} FwStatus;

/**
 * Opaque web handle.
 */
typedef struct FwWeb FwWeb;

/**
 * Summary of a flatness audit.
 */
typedef struct FwFlatness {
  double max_abs_k;
  double argmax_x;
  double argmax_y;
  double excluded_fraction;
  size_t evaluated;
  bool flat;
} FwFlatness;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *fw_version(void);

/**
 * Message for the last failed call on this thread, or null. Valid until the next failing call.
 */
const char *fw_last_error_message(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void fw_string_free(char *s);

/**
 * `p³ + A p + B = 0` on the given box.
 *
 * # Safety
 * `a` and `b` must be NUL-terminated strings; `out` must be writable.
 */
enum FwStatus fw_web_new_depressed(const char *a,
                                   const char *b,
                                   double xmin,
                                   double xmax,
                                   double ymin,
                                   double ymax,
                                   struct FwWeb **out);

/**
 * `K3 p³ + K2 p² + K1 p + K0 = 0` on the given box.
 *
 * # Safety
 * The coefficient pointers must be NUL-terminated strings; `out` must be writable.
 */
enum FwStatus fw_web_new_general(const char *k3,
                                 const char *k2,
                                 const char *k1,
                                 const char *k0,
                                 double xmin,
                                 double xmax,
                                 double ymin,
                                 double ymax,
                                 struct FwWeb **out);

/**
 * `p² + a p + b = 0` together with the vertical lines, on the given box.
 *
 * # Safety
 * `a` and `b` must be NUL-terminated strings; `out` must be writable.
 */
enum FwStatus fw_web_new_quadratic(const char *a,
                                   const char *b,
                                   double xmin,
                                   double xmax,
                                   double ymin,
                                   double ymax,
                                   struct FwWeb **out);

/**
 * Built-in web by catalog id.
 *
 * # Safety
 * `id` must be a NUL-terminated string; `out` must be writable.
 */
enum FwStatus fw_web_from_catalog(const char *id, struct FwWeb **out);

/**
 * Releases a web. Null is ignored.
 *
 * # Safety
 * `web` must come from a constructor of this library and not have been freed.
 */
void fw_web_free(struct FwWeb *web);

/**
 * The web spec as JSON.
 *
 * # Safety
 * `web` must be a live handle; `out` must be writable.
 */
enum FwStatus fw_web_to_json(const struct FwWeb *web, char **out);

/**
 * Connection form `(γ1, γ2)` of a depressed web at a regular point.
 *
 * # Safety
 * `web` must be a live handle; the out pointers must be writable.
 */
enum FwStatus fw_gamma(const struct FwWeb *web, double x, double y, double *gamma1, double *gamma2);

/**
 * Curvature density `K` and discriminant `δ` of a depressed web at a regular point.
 *
 * # Safety
 * `web` must be a live handle; the out pointers must be writable.
 */
enum FwStatus fw_curvature(const struct FwWeb *web, double x, double y, double *k, double *delta);

/**
 * Flatness audit of a depressed web on an `n × n` grid over its box.
 *
 * # Safety
 * `web` must be a live handle; `out` must be writable.
 */
enum FwStatus fw_flatness_audit(const struct FwWeb *web,
                                size_t n,
                                double tol,
                                struct FwFlatness *out);

/**
 * Singular point report at `(x, y)` as JSON. General cubics are reduced locally first.
 *
 * # Safety
 * `web` must be a live handle; `out` must be writable.
 */
enum FwStatus fw_classify_json(const struct FwWeb *web, double x, double y, char **out);

/**
 * Hexagon closure defect at offset `t` around `(cx, cy)`, one Runge-Kutta step per side.
 *
 * # Safety
 * `web` must be a live handle; `out` must be writable.
 */
enum FwStatus fw_hexagon_defect(const struct FwWeb *web,
                                double cx,
                                double cy,
                                double t,
                                double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLATWEB_H */
