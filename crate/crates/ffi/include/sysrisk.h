#ifndef SYSRISK_H
#define SYSRISK_H

/* Generated by build.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SysriskStatus {
  SYSRISK_STATUS_OK = 0,
  SYSRISK_STATUS_NULL_POINTER = 1,
  SYSRISK_STATUS_INVALID_ARGUMENT = 2,
  SYSRISK_STATUS_NUMERICAL_FAILURE = 3,
  SYSRISK_STATUS_IO = 4,
  SYSRISK_STATUS_PANIC = 5,
} SysriskStatus;

/**
 * Replicator dynamics parameters.
 */
typedef struct SysriskDynamics SysriskDynamics;

/**
 * Market parameters.
 */
typedef struct SysriskMarket SysriskMarket;

/**
 * One simulated run.
 */
typedef struct SysriskTrajectory SysriskTrajectory;

typedef struct SysriskThresholds {
  double default_onset;
  double systemic_onset;
  double switch_point;
  bool outside_theory;
} SysriskThresholds;

/**
 * Population state after a number of rounds.
 */
typedef struct SysriskRound {
  uint64_t round;
  uint64_t n;
  uint64_t n1;
  double eps;
  double psi;
  double default_frac;
  uint64_t departures;
} SysriskRound;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code.
 */
const char *sysrisk_status_message(enum SysriskStatus status);

/**
 * Message of the last failed call on this thread (empty if none). The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *sysrisk_last_error_message(void);

/**
 * # Safety
 * `out_market` must be a valid pointer to writable storage for one handle.
 */
enum SysriskStatus sysrisk_market_new(double wealth,
                                      double senior_debt,
                                      double interbank_fraction,
                                      double up_probability,
                                      double up_rate,
                                      double down_rate,
                                      double safe_rate,
                                      double borrow_rate,
                                      double link_probability,
                                      struct SysriskMarket **out_market);

/**
 * Builds the market and dynamics of a preset row (`"t2-r1"`, `"t4-r3-stay"`, ...).
 * Either out-pointer may be null if that half is not wanted.
 *
 * # Safety
 * `id` must be a NUL-terminated string; non-null out-pointers must be writable.
 */
enum SysriskStatus sysrisk_preset(const char *id,
                                  struct SysriskMarket **out_market,
                                  struct SysriskDynamics **out_dynamics);

/**
 * # Safety
 * `market` must be null or a handle from this library not yet freed.
 */
void sysrisk_market_free(struct SysriskMarket *market);

/**
 * Dynamics with count bounds of twice the rounded-up mean; departures are
 * on when `mean_departure_cap > 0`.
 *
 * # Safety
 * `out_dynamics` must be a valid pointer to writable storage for one handle.
 */
enum SysriskStatus sysrisk_dynamics_new(double mean_arrivals,
                                        double mean_switch_attempts,
                                        double mean_departure_cap,
                                        double arrival_accuracy,
                                        double switch_accuracy,
                                        uint64_t initial_population,
                                        double initial_fraction,
                                        uint64_t rounds,
                                        struct SysriskDynamics **out_dynamics);

/**
 * # Safety
 * `dynamics` must be null or a handle from this library not yet freed.
 */
void sysrisk_dynamics_free(struct SysriskDynamics *dynamics);

/**
 * # Safety
 * `market` must be a live handle and `out_thresholds` writable.
 */
enum SysriskStatus sysrisk_thresholds(const struct SysriskMarket *market,
                                      struct SysriskThresholds *out_thresholds);

/**
 * Large-network mean payment and default probability of a risky agent.
 *
 * # Safety
 * `market` must be a live handle; out-pointers must be writable.
 */
enum SysriskStatus sysrisk_clearing_limit(const struct SysriskMarket *market,
                                          double eps,
                                          double *out_mean_payment,
                                          double *out_default_probability);

/**
 * Exact flow state at time `t` from `(eps0, psi0)`, departures as configured.
 *
 * # Safety
 * Handles must be live; out-pointers must be writable.
 */
enum SysriskStatus sysrisk_flow_at(const struct SysriskMarket *market,
                                   const struct SysriskDynamics *dynamics,
                                   double eps0,
                                   double psi0,
                                   double t,
                                   double *out_eps,
                                   double *out_psi);

/**
 * Runs the agent-based process with default options.
 *
 * # Safety
 * Handles must be live; `out_trajectory` must be writable.
 */
enum SysriskStatus sysrisk_simulate(const struct SysriskMarket *market,
                                    const struct SysriskDynamics *dynamics,
                                    uint64_t seed,
                                    struct SysriskTrajectory **out_trajectory);

/**
 * Number of recorded rounds (0 for a null handle).
 *
 * # Safety
 * `trajectory` must be null or a live handle.
 */
size_t sysrisk_trajectory_len(const struct SysriskTrajectory *trajectory);

/**
 * # Safety
 * `trajectory` must be a live handle and `out_round` writable.
 */
enum SysriskStatus sysrisk_trajectory_round(const struct SysriskTrajectory *trajectory,
                                            size_t index,
                                            struct SysriskRound *out_round);

/**
 * Writes the run in the CLI's trajectory CSV format.
 *
 * # Safety
 * `trajectory` must be a live handle; `path` a NUL-terminated UTF-8 string.
 */
enum SysriskStatus sysrisk_trajectory_write_csv(const struct SysriskTrajectory *trajectory,
                                                const char *path);

/**
 * # Safety
 * `trajectory` must be null or a handle from this library not yet freed.
 */
void sysrisk_trajectory_free(struct SysriskTrajectory *trajectory);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SYSRISK_H */
