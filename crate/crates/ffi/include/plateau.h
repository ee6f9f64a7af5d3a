#ifndef PLATEAU_H
#define PLATEAU_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum PlateauStatus {
  PLATEAU_STATUS_OK = 0,
  PLATEAU_STATUS_NULL_POINTER = 1,
  PLATEAU_STATUS_INVALID_ARGUMENT = 2,
  PLATEAU_STATUS_PARSE = 3,
  PLATEAU_STATUS_SOLVER = 4,
  PLATEAU_STATUS_BUFFER_TOO_SMALL = 5,
  PLATEAU_STATUS_PANIC = 6,
} PlateauStatus;

/**
 * Outcome of a Plateau run.
 */
typedef enum PlateauRunStatus {
  PLATEAU_RUN_STATUS_CONVERGED = 0,
  PLATEAU_RUN_STATUS_HAUSDORFF_STALLED = 1,
  PLATEAU_RUN_STATUS_NO_ADMISSIBLE_SITE = 2,
  PLATEAU_RUN_STATUS_MAX_ITERATIONS = 3,
} PlateauRunStatus;

/**
 * Convex body in the plane or in space.
 */
typedef struct PlateauBody PlateauBody;

/**
 * Finished Plateau run.
 */
typedef struct PlateauRun PlateauRun;

/**
 * Dirichlet solution on its grid, with the closed-form error when known.
 */
typedef struct PlateauSolution PlateauSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *plateau_version(void);

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated)
 * and returns the buffer size it needs, or 0 when there is no error. Passing
 * a null `buf` or a short `len` only queries the size.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
uintptr_t plateau_last_error_message(char *buf, uintptr_t len);

/**
 * Convex hull of `count` points with `dim` coordinates each, stored row by row.
 *
 * # Safety
 * `coords` must hold `dim * count` values; `out` must be writable.
 */
enum PlateauStatus plateau_body_from_points(uintptr_t dim,
                                            const double *coords,
                                            uintptr_t count,
                                            struct PlateauBody **out);

/**
 * Geodesic polyhedron inscribed in the ball (`dim = 3`, `detail` = subdivision
 * level) or regular polygon inscribed in the disk (`dim = 2`, `detail` = vertices).
 *
 * # Safety
 * `center` must hold `dim` values; `out` must be writable.
 */
enum PlateauStatus plateau_body_ball(uintptr_t dim,
                                     const double *center,
                                     double radius,
                                     uint32_t detail,
                                     struct PlateauBody **out);

/**
 * Releases a body; null is ignored.
 *
 * # Safety
 * `body` must come from this library and not be used afterwards.
 */
void plateau_body_free(struct PlateauBody *body);

/**
 * # Safety
 * `body` must be a live handle.
 */
uintptr_t plateau_body_dim(const struct PlateauBody *body);

/**
 * Area (plane) or volume (space).
 *
 * # Safety
 * `body` must be a live handle; `out` must be writable.
 */
enum PlateauStatus plateau_body_volume(const struct PlateauBody *body, double *out);

/**
 * Signed distance (negative inside).
 *
 * # Safety
 * `x` must hold as many values as the body's dimension; `out` must be writable.
 */
enum PlateauStatus plateau_body_signed_distance(const struct PlateauBody *body,
                                                const double *x,
                                                double *out);

/**
 * Nearest point of the body to `x` (x itself when inside).
 *
 * # Safety
 * `x` and `out` must hold as many values as the body's dimension.
 */
enum PlateauStatus plateau_body_project(const struct PlateauBody *body,
                                        const double *x,
                                        double *out);

/**
 * Hausdorff distance between two bodies (sum of the directed distances).
 *
 * # Safety
 * `a` and `b` must be live handles; `out` must be writable.
 */
enum PlateauStatus plateau_hausdorff(const struct PlateauBody *a,
                                     const struct PlateauBody *b,
                                     double *out);

/**
 * Solves a Dirichlet problem given as TOML text. Relative barrier files
 * resolve against `base_dir` (null means the working directory).
 *
 * # Safety
 * `toml` must be a NUL-terminated string, `base_dir` null or one; `out` must be writable.
 */
enum PlateauStatus plateau_solve_toml(const char *toml,
                                      const char *base_dir,
                                      struct PlateauSolution **out);

/**
 * Number of interior grid nodes.
 *
 * # Safety
 * `sol` must be a live handle or null.
 */
uintptr_t plateau_solution_len(const struct PlateauSolution *sol);

/**
 * Copies node coordinates (`2 * len` values: x, y per node; y = 0 for
 * intervals) and values (`len` values). Either output may be null.
 *
 * # Safety
 * `xy` must hold `2 * len` and `values` `len` writable values.
 */
enum PlateauStatus plateau_solution_copy(const struct PlateauSolution *sol,
                                         double *xy,
                                         double *values,
                                         uintptr_t len);

/**
 * Sup-norm error against the closed form, NaN when none is known.
 *
 * # Safety
 * `sol` must be a live handle or null.
 */
double plateau_solution_sup_error(const struct PlateauSolution *sol);

/**
 * Final residual of the discrete equation.
 *
 * # Safety
 * `sol` must be a live handle or null.
 */
double plateau_solution_residual(const struct PlateauSolution *sol);

/**
 * # Safety
 * `sol` must come from this library and not be used afterwards.
 */
void plateau_solution_free(struct PlateauSolution *sol);

/**
 * Volume-minimising run on `body` (which is left untouched) with the frozen
 * set `⟨p, normal⟩ ≤ offset` held within `frozen_tol`, target curvature `k`
 * and at most `max_iters` excisions.
 *
 * # Safety
 * `normal` must hold as many values as the body's dimension; `out` must be writable.
 */
enum PlateauStatus plateau_run_new(const struct PlateauBody *body,
                                   const double *normal,
                                   double offset,
                                   double frozen_tol,
                                   double k,
                                   uintptr_t max_iters,
                                   struct PlateauRun **out);

/**
 * # Safety
 * `run` and `out` must be valid.
 */
enum PlateauStatus plateau_run_status(const struct PlateauRun *run, enum PlateauRunStatus *out);

/**
 * Number of recorded volumes (initial body plus one per excision).
 *
 * # Safety
 * `run` must be a live handle or null.
 */
uintptr_t plateau_run_volume_count(const struct PlateauRun *run);

/**
 * Copies the volume sequence.
 *
 * # Safety
 * `out` must hold `len` writable values.
 */
enum PlateauStatus plateau_run_volumes(const struct PlateauRun *run, double *out, uintptr_t len);

/**
 * Hausdorff distance of the free surface to the spherical cap of curvature
 * `k` spanning the round equator of radius `radius` at height 0.
 *
 * # Safety
 * `run` and `out` must be valid.
 */
enum PlateauStatus plateau_run_cap_distance(const struct PlateauRun *run,
                                            double radius,
                                            double *out);

/**
 * Copy of the final body as a new handle.
 *
 * # Safety
 * `run` and `out` must be valid.
 */
enum PlateauStatus plateau_run_body(const struct PlateauRun *run, struct PlateauBody **out);

/**
 * # Safety
 * `run` must come from this library and not be used afterwards.
 */
void plateau_run_free(struct PlateauRun *run);

/**
 * Runs the command line with `argc` arguments (the program name excluded)
 * and returns its exit code.
 *
 * # Safety
 * `argv` must hold `argc` NUL-terminated strings.
 */
int32_t plateau_cli_run(uintptr_t argc, const char *const *argv);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PLATEAU_H */
