#ifndef AFMI_H
#define AFMI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AfmiBifurcation {
  AFMI_BIFURCATION_TRANSCRITICAL = 0,
  AFMI_BIFURCATION_SADDLE_NODE = 1,
  AFMI_BIFURCATION_HOPF = 2,
  AFMI_BIFURCATION_HOMOCLINIC = 3,
} AfmiBifurcation;

typedef enum AfmiEquilibriumKind {
  AFMI_EQUILIBRIUM_KIND_TRIVIAL = 0,
  AFMI_EQUILIBRIUM_KIND_PREDATOR_FREE = 1,
  AFMI_EQUILIBRIUM_KIND_PREY_FREE = 2,
  AFMI_EQUILIBRIUM_KIND_INTERIOR_LOW = 3,
  AFMI_EQUILIBRIUM_KIND_INTERIOR_HIGH = 4,
  AFMI_EQUILIBRIUM_KIND_INTERIOR_COLLIDED = 5,
} AfmiEquilibriumKind;

typedef enum AfmiStability {
  AFMI_STABILITY_STABLE_NODE = 0,
  AFMI_STABILITY_STABLE_FOCUS = 1,
  AFMI_STABILITY_UNSTABLE_NODE = 2,
  AFMI_STABILITY_UNSTABLE_FOCUS = 3,
  AFMI_STABILITY_SADDLE = 4,
  AFMI_STABILITY_NON_HYPERBOLIC = 5,
} AfmiStability;

typedef enum AfmiStatus {
  AFMI_STATUS_OK = 0,
  AFMI_STATUS_NULL_POINTER = 1,
  AFMI_STATUS_INVALID_PARAMETER = 2,
  AFMI_STATUS_DOMAIN = 3,
  AFMI_STATUS_BUFFER_TOO_SMALL = 4,
  AFMI_STATUS_PRECONDITION = 5,
  AFMI_STATUS_NO_BRACKET = 6,
  AFMI_STATUS_NUMERICAL = 7,
  AFMI_STATUS_INDETERMINATE = 8,
  AFMI_STATUS_PANIC = 99,
} AfmiStatus;

typedef enum AfmiTermination {
  AFMI_TERMINATION_CONVERGED = 0,
  AFMI_TERMINATION_ESCAPED = 1,
  AFMI_TERMINATION_BUDGET_EXHAUSTED = 2,
  AFMI_TERMINATION_REACHED_AXIS = 3,
} AfmiTermination;

/**
 * Opaque model handle.
 */
typedef struct AfmiModel AfmiModel;

/**
 * Opaque trajectory handle.
 */
typedef struct AfmiTrajectory AfmiTrajectory;

typedef struct AfmiEquilibrium {
  enum AfmiEquilibriumKind kind;
  double x;
  double y;
  double eig_re[2];
  double eig_im[2];
  enum AfmiStability stability;
} AfmiEquilibrium;

typedef struct AfmiEvent {
  enum AfmiBifurcation kind;
  double xi_star;
  double x;
  double y;
  double residual;
} AfmiEvent;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *afmi_last_error(void);

/**
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum AfmiStatus afmi_model_new(double alpha,
                               double beta,
                               double delta,
                               double epsilon,
                               double xi,
                               double k,
                               struct AfmiModel **out);

/**
 * # Safety
 * `model` must come from `afmi_model_new` and not be freed twice.
 */
void afmi_model_free(struct AfmiModel *model);

/**
 * # Safety
 * `model` must be a live handle.
 */
enum AfmiStatus afmi_model_set_xi(struct AfmiModel *model, double xi);

/**
 * # Safety
 * `model` must be a live handle and `out` valid for two doubles.
 */
enum AfmiStatus afmi_model_rhs(const struct AfmiModel *model, double x, double y, double *out);

/**
 * Writes up to `cap` equilibria to `buf` and their total number to
 * `count`. Returns `BufferTooSmall` when `cap` is short; `count` is still
 * set. `buf` may be null when `cap` is 0.
 *
 * # Safety
 * `buf` must be valid for `cap` elements, `count` for one.
 */
enum AfmiStatus afmi_equilibria(const struct AfmiModel *model,
                                struct AfmiEquilibrium *buf,
                                size_t cap,
                                size_t *count);

/**
 * Integrates from `(x0, y0)` with default settings; `max_time <= 0` keeps
 * the default horizon.
 *
 * # Safety
 * `model` must be a live handle and `out` valid for one pointer.
 */
enum AfmiStatus afmi_simulate(const struct AfmiModel *model,
                              double x0,
                              double y0,
                              double max_time,
                              struct AfmiTrajectory **out);

/**
 * # Safety
 * `traj` must come from `afmi_simulate` and not be freed twice.
 */
void afmi_trajectory_free(struct AfmiTrajectory *traj);

/**
 * Number of samples; 0 for a null handle.
 *
 * # Safety
 * `traj` must be null or a live handle.
 */
size_t afmi_trajectory_len(const struct AfmiTrajectory *traj);

/**
 * # Safety
 * `traj` must be a live handle; `t`, `x`, `y` valid for one double each.
 */
enum AfmiStatus afmi_trajectory_sample(const struct AfmiTrajectory *traj,
                                       size_t index,
                                       double *t,
                                       double *x,
                                       double *y);

/**
 * How the integration stopped. For `Converged`, `prey_free` is set to 1
 * when the limit is the prey-free equilibrium and 0 otherwise.
 *
 * # Safety
 * `traj` must be a live handle; `termination` and `prey_free` valid.
 */
enum AfmiStatus afmi_trajectory_termination(const struct AfmiTrajectory *traj,
                                            enum AfmiTermination *termination,
                                            int32_t *prey_free);

/**
 * Locates a bifurcation in xi with the other parameters of `model`.
 * The bracket is ignored for `Transcritical`.
 *
 * # Safety
 * `model` must be a live handle and `out` valid for one event.
 */
enum AfmiStatus afmi_locate(const struct AfmiModel *model,
                            enum AfmiBifurcation kind,
                            double lo,
                            double hi,
                            struct AfmiEvent *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AFMI_H */
