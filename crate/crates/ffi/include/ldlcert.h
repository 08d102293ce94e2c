#ifndef LDLCERT_H
#define LDLCERT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>

/**
 * Result of every call. `Infeasible` is a verdict, not an error.
 */
typedef enum LdlcertStatus {
  LDLCERT_STATUS_OK = 0,
  LDLCERT_STATUS_INFEASIBLE = 1,
  /**
   * Malformed JSON or a table that fails validation.
   */
  LDLCERT_STATUS_INVALID_DATA = 2,
  /**
   * Arguments outside their domain (bounds, efficiencies, indices).
   */
  LDLCERT_STATUS_INVALID_ARGUMENT = 3,
  /**
   * The operation does not apply to this scenario or convention.
   */
  LDLCERT_STATUS_UNSUPPORTED = 4,
  LDLCERT_STATUS_TOO_LARGE = 5,
  /**
   * The linear-program solver failed to reach a verified verdict.
   */
  LDLCERT_STATUS_SOLVER_FAILURE = 6,
  LDLCERT_STATUS_NULL_POINTER = 7,
  LDLCERT_STATUS_PANIC = 8,
} LdlcertStatus;

/**
 * Conditional table `P(a|x)`.
 */
typedef struct LdlcertBehavior LdlcertBehavior;

/**
 * Unconditional table `P(a, x)`, optionally with per-entry errors.
 */
typedef struct LdlcertJoint LdlcertJoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message on this thread, or null. Valid until the next failing
 * call on the same thread; do not free.
 */
const char *ldlcert_last_error(void);

/**
 * Library version as a static string.
 */
const char *ldlcert_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void ldlcert_string_free(char *s);

/**
 * Parses a data file with kind `joint_probabilities` or `counts`.
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` must be writable.
 */
enum LdlcertStatus ldlcert_joint_from_json(const char *json, struct LdlcertJoint **out);

/**
 * Parses any outcome table into a conditional behavior: joint tables and
 * counts are conditioned on the inputs, lossy tables postselected.
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` must be writable.
 */
enum LdlcertStatus ldlcert_behavior_from_json(const char *json, struct LdlcertBehavior **out);

/**
 * `P(a|x)` from a joint table.
 *
 * # Safety
 * `joint` must be a live handle; `out` must be writable.
 */
enum LdlcertStatus ldlcert_behavior_from_joint(const struct LdlcertJoint *joint,
                                               struct LdlcertBehavior **out);

/**
 * The ideal two-qubit Hardy behavior.
 *
 * # Safety
 * `out` must be writable.
 */
enum LdlcertStatus ldlcert_hardy_behavior(struct LdlcertBehavior **out);

/**
 * Reads `P(a|x)`; `outcomes` and `inputs` hold `parties` entries each.
 *
 * # Safety
 * `behavior` must be a live handle, the arrays readable for `parties`
 * elements and `out` writable.
 */
enum LdlcertStatus ldlcert_behavior_get(const struct LdlcertBehavior *behavior,
                                        const size_t *outcomes,
                                        const size_t *inputs,
                                        size_t parties,
                                        double *out);

/**
 * Critical ratio of the Hardy-type inequality; `+inf` when `P(00|00) = 0`.
 *
 * # Safety
 * `behavior` must be a live handle; `out` writable.
 */
enum LdlcertStatus ldlcert_critical_ratio(const struct LdlcertBehavior *behavior, double *out);

/**
 * Membership in the postselected LDL set with per-party detection bounds.
 *
 * `efficiencies` holds one observed detection probability per input tuple
 * (`n_efficiencies` entries), or is null for a common unknown value.
 * Returns `Ok` when feasible and `Infeasible` otherwise; either way
 * `report_json` receives the certificate.
 *
 * # Safety
 * `behavior` must be a live handle, `efficiencies` readable when non-null,
 * `report_json` writable.
 */
enum LdlcertStatus ldlcert_membership_ldlps(const struct LdlcertBehavior *behavior,
                                            double eta_min,
                                            double eta_max,
                                            const double *efficiencies,
                                            size_t n_efficiencies,
                                            bool exact,
                                            char **report_json);

/**
 * Analysis report of a joint table as JSON. `eta_max` lists
 * `n_eta_max` upper detection bounds at which to report the required lower
 * bound (null for the defaults 1, 0.5, 0.1).
 *
 * # Safety
 * `joint` must be a live handle, `eta_max` readable when non-null and
 * `report_json` writable.
 */
enum LdlcertStatus ldlcert_analyze_json(const struct LdlcertJoint *joint,
                                        const double *eta_max,
                                        size_t n_eta_max,
                                        char **report_json);

/**
 * # Safety
 * `b` must come from this library and not have been freed. Null is ignored.
 */
void ldlcert_behavior_free(struct LdlcertBehavior *b);

/**
 * # Safety
 * `j` must come from this library and not have been freed. Null is ignored.
 */
void ldlcert_joint_free(struct LdlcertJoint *j);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LDLCERT_H */
