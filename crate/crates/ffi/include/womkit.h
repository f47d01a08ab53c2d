#ifndef WOMKIT_H
#define WOMKIT_H

/* Generated by cbindgen from womkit-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a womkit call.
 */
typedef enum WkStatus {
  WK_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  WK_STATUS_NULL_POINTER = 1,
  /**
   * A parameter was outside its documented domain.
   */
  WK_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The requested payload lies outside `(0, log2 K]`.
   */
  WK_STATUS_INFEASIBLE_PAYLOAD = 3,
  /**
   * A conditional chain violated row-stochasticity or monotonicity.
   */
  WK_STATUS_INVALID_CHAIN = 4,
  /**
   * The stage has no bins; nothing can be recorded or decoded.
   */
  WK_STATUS_DEAD_STAGE = 5,
  /**
   * The message does not fit the stage's bin count.
   */
  WK_STATUS_MESSAGE_OUT_OF_RANGE = 6,
  /**
   * The brute-force oracle refused an instance beyond its budget.
   */
  WK_STATUS_ORACLE_TOO_LARGE = 7,
  /**
   * An index argument was out of bounds for the handle.
   */
  WK_STATUS_INDEX_OUT_OF_RANGE = 8,
} WkStatus;

/**
 * Opaque capacity solution; read through `wk_capacity_*`.
 */
typedef struct WkCapacityResult WkCapacityResult;

/**
 * Opaque aggregated simulation report; read through `wk_sim_report_*`.
 */
typedef struct WkSimReport WkSimReport;

/**
 * One point of the payload -> efficiency upper bound curve.
 */
typedef struct WkBoundPoint {
  double payload;
  double beta;
  double cost;
  double efficiency_upper;
  double alpha;
} WkBoundPoint;

/**
 * Per-stage statistics row of a simulation report.
 */
typedef struct WkStageRow {
  uint32_t epoch_level;
  uint32_t dropped_count;
  uint64_t bins;
  double bits;
  uint64_t attempts;
  uint64_t failures;
  double empirical_failure_rate;
  double exact_failure_prob;
} WkStageRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code.
 */
const char *wk_status_message(enum WkStatus status);

/**
 * Expected level drop per write of the Gibbs-form distribution.
 */
enum WkStatus wk_cost(double beta, uint32_t levels, double *out);

/**
 * Entropy per write in nats.
 */
enum WkStatus wk_rate_nats(double beta, uint32_t levels, double *out);

/**
 * Entropy per write in bits.
 */
enum WkStatus wk_rate_bits(double beta, uint32_t levels, double *out);

/**
 * Stage coding efficiency `rate/cost` in nats per level.
 */
enum WkStatus wk_stage_efficiency_nats(double beta, uint32_t levels, double *out);

/**
 * Stage coding efficiency `rate/cost` in bits per level.
 */
enum WkStatus wk_stage_efficiency_bits(double beta, uint32_t levels, double *out);

/**
 * Largest feasible payload for `levels`, in bits.
 */
enum WkStatus wk_max_payload_bits(uint32_t levels, double *out);

/**
 * The beta at which the rate equals `p_bits`.
 */
enum WkStatus wk_solve_beta_for_payload(double p_bits, uint32_t levels, double *out);

/**
 * Efficiency upper bound at payload `p_bits` for a `levels`-level cell.
 */
enum WkStatus wk_upper_bound_efficiency(double p_bits,
                                        uint32_t levels,
                                        double alpha,
                                        struct WkBoundPoint *out);

/**
 * Bin count of a stage: `floor((1-epsilon) * (cells - dropped))`.
 */
enum WkStatus wk_stage_bins(uint64_t cells, uint64_t dropped, double epsilon, uint64_t *out);

/**
 * Exact failure probability of a stage encode.
 */
enum WkStatus wk_exact_stage_error(uint64_t cells, uint64_t dropped, double epsilon, double *out);

/**
 * Lower bound on the expected bits recorded per erase cycle.
 */
enum WkStatus wk_expected_rate_lower_bound(uint64_t cells,
                                           uint32_t levels,
                                           double epsilon,
                                           double *out);

/**
 * All-success payload of the scheme, bits per cell per write.
 */
enum WkStatus wk_payload_formula(uint64_t cells, double epsilon, double *out);

/**
 * Large-block efficiency lower bound at epsilon = 0.5 (log base 2).
 */
enum WkStatus wk_efficiency_lower_bound_asymptotic(uint64_t cells, double alpha, double *out);

/**
 * Runs the rewriting-scheme simulation and returns a report handle.
 * Free with `wk_sim_report_free`.
 */
enum WkStatus wk_simulate(uint64_t cells,
                          uint32_t levels,
                          double epsilon,
                          uint64_t seed,
                          uint64_t trials,
                          double alpha,
                          struct WkSimReport **out);

/**
 * Measured payload, bits per cell per write.
 */
enum WkStatus wk_sim_report_payload(const struct WkSimReport *report, double *out);

/**
 * Payload if every live stage had succeeded; equals the payload formula.
 */
enum WkStatus wk_sim_report_payload_planned(const struct WkSimReport *report, double *out);

/**
 * Measured coding efficiency, bits per level cost times alpha.
 */
enum WkStatus wk_sim_report_efficiency(const struct WkSimReport *report, double *out);

/**
 * Bits offered by the live schedule per erase cycle.
 */
enum WkStatus wk_sim_report_bits_attempted(const struct WkSimReport *report, double *out);

/**
 * Mean bits recorded per trial.
 */
enum WkStatus wk_sim_report_bits_recorded(const struct WkSimReport *report, double *out);

/**
 * Mean bits lost to encode misses per trial.
 */
enum WkStatus wk_sim_report_bits_lost(const struct WkSimReport *report, double *out);

/**
 * Total encode misses across all trials.
 */
enum WkStatus wk_sim_report_failures(const struct WkSimReport *report, uint64_t *out);

enum WkStatus wk_sim_report_trials(const struct WkSimReport *report, uint64_t *out);

/**
 * Live stages executed per trial.
 */
enum WkStatus wk_sim_report_stages_run(const struct WkSimReport *report, uint64_t *out);

/**
 * Planned stage slots per erase cycle: `(K-1) * N`.
 */
enum WkStatus wk_sim_report_stages_planned(const struct WkSimReport *report, uint64_t *out);

/**
 * Number of per-stage statistics rows.
 */
enum WkStatus wk_sim_report_stage_count(const struct WkSimReport *report, uint64_t *out);

/**
 * Copies per-stage statistics row `index` into `out`.
 */
enum WkStatus wk_sim_report_stage(const struct WkSimReport *report,
                                  uint64_t index,
                                  struct WkStageRow *out);

/**
 * Serializes the whole report as JSON. Free the string with
 * `wk_string_free`.
 */
enum WkStatus wk_sim_report_json(const struct WkSimReport *report, char **out);

/**
 * Releases a report handle. Passing null is a no-op.
 */
void wk_sim_report_free(struct WkSimReport *report);

/**
 * Releases a string returned by this library. Passing null is a no-op.
 */
void wk_string_free(char *text);

/**
 * Maximizes the total achievable rate over monotone level chains.
 * Free the handle with `wk_capacity_free`.
 */
enum WkStatus wk_max_sum_rate(uint32_t levels,
                              uint32_t writes,
                              uint32_t restarts,
                              uint64_t seed,
                              struct WkCapacityResult **out);

/**
 * Independent brute-force grid maximum for small instances.
 */
enum WkStatus wk_brute_force_sum_rate(uint32_t levels,
                                      uint32_t writes,
                                      uint32_t grid_steps,
                                      double *out);

enum WkStatus wk_capacity_sum_rate(const struct WkCapacityResult *result, double *out);

enum WkStatus wk_capacity_writes(const struct WkCapacityResult *result, uint64_t *out);

enum WkStatus wk_capacity_levels(const struct WkCapacityResult *result, uint64_t *out);

/**
 * Per-write entropy budget of the solution, in bits.
 */
enum WkStatus wk_capacity_rate(const struct WkCapacityResult *result,
                               uint64_t write_index,
                               double *out);

/**
 * Conditional probability `P(U(write+1) = to | U(write) = from)` of the
 * solution chain.
 */
enum WkStatus wk_capacity_conditional(const struct WkCapacityResult *result,
                                      uint64_t write_index,
                                      uint64_t from_level,
                                      uint64_t to_level,
                                      double *out);

/**
 * Releases a capacity handle. Passing null is a no-op.
 */
void wk_capacity_free(struct WkCapacityResult *result);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* WOMKIT_H */
