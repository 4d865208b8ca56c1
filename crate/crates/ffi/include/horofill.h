#ifndef HOROFILL_H
#define HOROFILL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes.
 */
typedef enum HfStatus {
  HF_STATUS_OK = 0,
  HF_STATUS_NULL_POINTER = 1,
  HF_STATUS_INVALID_ARGUMENT = 2,
  HF_STATUS_DIMENSION = 3,
  HF_STATUS_HYPOTHESIS = 4,
  HF_STATUS_MESH_NOT_REACHED = 5,
  HF_STATUS_PARTITION = 6,
  HF_STATUS_IO = 7,
  HF_STATUS_CONFIG = 8,
  HF_STATUS_PANIC = 9,
  HF_STATUS_OTHER = 10,
} HfStatus;

typedef struct HfLoop HfLoop;

typedef struct HfPartition HfPartition;

typedef struct HfPolytope HfPolytope;

typedef struct HfRootSystem HfRootSystem;

typedef struct HfTrace HfTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null. Valid until the next failing call.
 */
const char *hf_last_error(void);

/*
 Library version as a static string.
 */
const char *hf_version(void);

/*
 Root system from a JSON descriptor such as `{"family": "a", "rank": 3}`.

 # Safety
 `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum HfStatus hf_root_system_from_json(const char *json, struct HfRootSystem **out);

/*
 # Safety
 `rs` must be a live handle or null; `order` and `rank` valid pointers.
 */
enum HfStatus hf_root_system_info(const struct HfRootSystem *rs, size_t *order, size_t *rank);

/*
 # Safety
 `rs` must come from this library and not be freed twice.
 */
void hf_root_system_free(struct HfRootSystem *rs);

/*
 Trace with every orbit gradient of `-theta` and one common offset; `theta` is normalised.

 # Safety
 `theta` must hold `dim` doubles; `rs` a live handle; `out` a valid pointer.
 */
enum HfStatus hf_trace_symmetric(const struct HfRootSystem *rs,
                                 const double *theta,
                                 size_t dim,
                                 double offset,
                                 struct HfTrace **out);

/*
 Trace from its JSON file format.

 # Safety
 `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum HfStatus hf_trace_from_json(const char *json, struct HfTrace **out);

/*
 # Safety
 `x` must hold `dim` doubles; `trace` a live handle; `value` a valid pointer.
 */
enum HfStatus hf_trace_value(const struct HfTrace *trace,
                             const double *x,
                             size_t dim,
                             double *value);

/*
 # Safety
 `trace` must come from this library and not be freed twice.
 */
void hf_trace_free(struct HfTrace *trace);

/*
 Convex hull of `count` points of dimension `dim` (row-major); must not be full-dimensional.

 # Safety
 `coords` must hold `count * dim` doubles; `out` a valid pointer.
 */
enum HfStatus hf_polytope_from_vertices(const double *coords,
                                        size_t count,
                                        size_t dim,
                                        struct HfPolytope **out);

/*
 # Safety
 `p` must come from this library and not be freed twice.
 */
void hf_polytope_free(struct HfPolytope *p);

/*
 Closed polygon in `E^dim` from `count` row-major points.

 # Safety
 `coords` must hold `count * dim` doubles; `out` a valid pointer.
 */
enum HfStatus hf_loop_flat(const double *coords, size_t count, size_t dim, struct HfLoop **out);

/*
 Closed polygon on the tube `∂N_radius(p)`.

 # Safety
 `coords` must hold `count * dim` doubles; `p` a live handle; `out` a valid pointer.
 */
enum HfStatus hf_loop_on_tube(const struct HfPolytope *p,
                              double radius,
                              const double *coords,
                              size_t count,
                              size_t dim,
                              struct HfLoop **out);

/*
 Wobbling loop of the given length on `∂N_radius(p)` around `axis`.

 # Safety
 `axis` must hold `dim` doubles; `p` a live handle; `out` a valid pointer.
 */
enum HfStatus hf_wobble_loop(const struct HfPolytope *p,
                             double radius,
                             const double *axis,
                             size_t dim,
                             double length,
                             double spacing,
                             struct HfLoop **out);

/*
 # Safety
 `lp` must be a live handle; the out pointers valid.
 */
enum HfStatus hf_loop_info(const struct HfLoop *lp, size_t *vertices, double *length);

/*
 # Safety
 `lp` must come from this library and not be freed twice.
 */
void hf_loop_free(struct HfLoop *lp);

/*
 Cone fill of a flat loop with bricks of perimeter at most `mesh`.

 # Safety
 `lp` must be a live handle and `out` a valid pointer.
 */
enum HfStatus hf_cone_fill(const struct HfLoop *lp, double mesh, struct HfPartition **out);

/*
 Fill of a flat loop lying outside the open sublevel set `{trace < 0}`.

 # Safety
 `trace` and `lp` must be live handles and `out` a valid pointer.
 */
enum HfStatus hf_fill_flat_loop(const struct HfTrace *trace,
                                const struct HfLoop *lp,
                                double mesh,
                                struct HfPartition **out);

/*
 Fill of a loop on `∂N_radius(p)`.

 # Safety
 `p` and `lp` must be live handles and `out` a valid pointer.
 */
enum HfStatus hf_fill_tube_loop(const struct HfPolytope *p,
                                double radius,
                                const struct HfLoop *lp,
                                double mesh,
                                struct HfPartition **out);

/*
 Area, mesh and brick census of a partition.

 # Safety
 `fp` must be a live handle; every out pointer valid.
 */
enum HfStatus hf_partition_info(const struct HfPartition *fp,
                                size_t *area,
                                double *mesh,
                                size_t *flat_bricks,
                                size_t *wild_bricks);

/*
 Copy triangle vertex indices (3 per triangle) into `buf`. With `buf` null only `needed`
 is written.

 # Safety
 `fp` must be a live handle; `buf` must hold `cap` entries when non-null.
 */
enum HfStatus hf_partition_triangles(const struct HfPartition *fp,
                                     size_t *buf,
                                     size_t cap,
                                     size_t *needed);

/*
 Re-check a partition against a loop from scratch.

 # Safety
 `lp` and `fp` must be live handles; out pointers valid.
 */
enum HfStatus hf_validate_partition(const struct HfLoop *lp,
                                    const struct HfPartition *fp,
                                    double *mesh,
                                    size_t *area);

/*
 # Safety
 `fp` must come from this library and not be freed twice.
 */
void hf_partition_free(struct HfPartition *fp);

/*
 `eps - eps^2 / 2` for `eps` in `[0, 1]`.

 # Safety
 `out` must be a valid pointer.
 */
enum HfStatus hf_exponent_step(double eps, double *out);

/*
 Number of recurrence steps from `eps0` down to at most `tol`, and the final value.

 # Safety
 `steps` and `last` must be valid pointers.
 */
enum HfStatus hf_bootstrap(double eps0, double tol, size_t *steps, double *last);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HOROFILL_H */
