#ifndef SPARSEPOSE_H
#define SPARSEPOSE_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum SpStatus {
  /**
   * Success; any output parameters are filled.
   */
  SpOk = 0,
  /**
   * Not enough frames buffered yet; no pose was produced.
   */
  SpPending = 1,
  /**
   * A required pointer argument was null.
   */
  SpNullArg = 2,
  /**
   * A path was not valid UTF-8 or an argument was out of range.
   */
  SpInvalidArg = 3,
  /**
   * The checkpoint or skeleton file failed to load.
   */
  SpLoadFailed = 4,
  /**
   * Inference failed (degenerate rotation or shape error).
   */
  SpInferFailed = 5,
} SpStatus;

/**
 * Opaque streaming session.
 */
typedef struct SpSession SpSession;

/**
 * One 6DoF device observation: world position and row-major 3x3 rotation.
 */
typedef struct SpObservation {
  double pos[3];
  double orient[9];
} SpObservation;

/**
 * One predicted body pose: pelvis world position, row-major pelvis
 * orientation, and the 21 local joint rotations in joint-index order.
 */
typedef struct SpPose {
  double root_pos[3];
  double global_orient[9];
  double local_rot[189];
} SpPose;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Opens a session from a checkpoint. `skeleton_path` may be null to use the
 * built-in rig; `ik_iterations = 0` disables the arm refinement.
 *
 * # Safety
 * `checkpoint_path` (and `skeleton_path` when non-null) must point to
 * nul-terminated strings; `out` must point to writable storage for one
 * pointer. The returned session must be released with [`sp_session_close`].
 */
enum SpStatus sp_session_open(const char *checkpoint_path,
                              const char *skeleton_path,
                              int ik_iterations,
                              struct SpSession **out);

/**
 * Frees a session. Null is a no-op.
 *
 * # Safety
 * `session` must be a pointer returned by [`sp_session_open`] that has not
 * been closed already.
 */
void sp_session_close(struct SpSession *session);

/**
 * Window length of the loaded model; the first pose appears after
 * `window + 1` pushed frames.
 *
 * # Safety
 * `session` must be a live session pointer.
 */
uint32_t sp_session_window(const struct SpSession *session);

/**
 * Pushes one frame of observations (head, left hand, right hand) and, once
 * warmed up, writes the predicted pose for this frame into `out_pose`.
 *
 * Returns `SpPending` while the buffer is still filling.
 *
 * # Safety
 * `session` must be a live session pointer, `obs` must point to three
 * observations, and `out_pose` must point to writable storage for one pose.
 */
enum SpStatus sp_session_push(struct SpSession *session,
                              const struct SpObservation *obs,
                              struct SpPose *out_pose);

/**
 * Static description of a status code.
 */
const char *sp_status_message(enum SpStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPARSEPOSE_H */
