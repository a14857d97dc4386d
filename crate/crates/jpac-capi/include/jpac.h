/* C interface for the jpac solver. Generated by cbindgen; do not edit. */

#ifndef JPAC_H
#define JPAC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Selects the smoothed projected Barzilai-Borwein inner solver.
#define JPAC_SOLVER_PABB 0

// Selects the projected subgradient inner solver.
#define JPAC_SOLVER_SUBGRAD 1

// Ranks removal candidates by interference footprint.
#define JPAC_RULE_FOOTPRINT 0

// Ranks removal candidates by clipped excess interference.
#define JPAC_RULE_EXCESS 1

// Ranks removal candidates by constraint violation norm.
#define JPAC_RULE_VIOLATION 2

// Outcome of a C API call.
typedef enum JpacStatus {
  // The call succeeded.
  JPAC_STATUS_OK = 0,
  // A required pointer argument was null.
  JPAC_STATUS_NULL_ARGUMENT = 1,
  // An argument was malformed or out of range.
  JPAC_STATUS_INVALID_ARGUMENT = 2,
  // Reading the instance file failed.
  JPAC_STATUS_IO_ERROR = 3,
  // A caller-provided buffer is shorter than the data to copy.
  JPAC_STATUS_BUFFER_TOO_SMALL = 4,
  // The solver rejected the problem or failed internally.
  JPAC_STATUS_SOLVER_ERROR = 5,
  // A panic was caught at the language boundary.
  JPAC_STATUS_INTERNAL_PANIC = 6,
} JpacStatus;

// Opaque handle to a normalized problem instance.
typedef struct JpacInstance JpacInstance;

// Opaque handle to the outcome of a solve.
typedef struct JpacSolution JpacSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Loads a JSON instance file and normalizes it into a solvable problem.
//
// On success writes a fresh handle to `out`; the caller owns it and must
// release it with [`jpac_instance_free`].
//
// # Safety
//
// `path` must point to a nul-terminated string and `out` to a writable
// pointer slot. Both must stay valid for the duration of the call.
enum JpacStatus jpac_instance_load(const char *path, struct JpacInstance **out);

// Generates a random instance from a seeded dense deployment.
//
// `links` transmitter-receiver pairs are dropped uniformly in a square
// region, `samples` channel realizations are drawn with multiplicative
// `spread`, and the whole construction is reproducible from `seed`. On
// success writes a fresh handle to `out`; release it with
// [`jpac_instance_free`].
//
// # Safety
//
// `out` must point to a writable pointer slot valid for the duration of the
// call.
enum JpacStatus jpac_instance_generate(uint32_t links,
                                       uint32_t samples,
                                       double spread,
                                       uint64_t seed,
                                       struct JpacInstance **out);

// Returns the number of links in the instance, or 0 for a null handle.
//
// # Safety
//
// `instance` must be null or a live handle from this library.
uint32_t jpac_instance_links(const struct JpacInstance *instance);

// Returns the number of channel realizations, or 0 for a null handle.
//
// # Safety
//
// `instance` must be null or a live handle from this library.
uint32_t jpac_instance_samples(const struct JpacInstance *instance);

// Releases an instance handle. Passing null is a no-op.
//
// # Safety
//
// `instance` must be null or a handle produced by this library that has not
// been freed yet.
void jpac_instance_free(struct JpacInstance *instance);

// Runs the full deflation pipeline on an instance.
//
// `solver` is [`JPAC_SOLVER_PABB`] or [`JPAC_SOLVER_SUBGRAD`] (the latter
// with its default step schedule), `rule` one of the `JPAC_RULE_*` removal
// rules. On success writes a fresh handle to `out`; release it with
// [`jpac_solution_free`].
//
// # Safety
//
// `instance` must be a live handle and `out` a writable pointer slot; both
// must stay valid for the duration of the call.
enum JpacStatus jpac_solve(const struct JpacInstance *instance,
                           int solver,
                           int rule,
                           struct JpacSolution **out);

// Returns how many links the solution serves, or 0 for a null handle.
//
// # Safety
//
// `solution` must be null or a live handle from this library.
uint32_t jpac_solution_supported_count(const struct JpacSolution *solution);

// Copies the zero-based indices of the served links into `buffer`.
//
// `capacity` is the number of `uint32_t` slots in `buffer`; it must be at
// least [`jpac_solution_supported_count`]. Indices are ascending.
//
// # Safety
//
// `solution` must be a live handle and `buffer` must point to at least
// `capacity` writable `uint32_t` slots.
enum JpacStatus jpac_solution_supported(const struct JpacSolution *solution,
                                        uint32_t *buffer,
                                        size_t capacity);

// Copies the normalized transmit power of each served link into `buffer`.
//
// Values lie in `[0, 1]` (fraction of the link's power budget) and are
// ordered like [`jpac_solution_supported`]. `capacity` is the number of
// `double` slots in `buffer`.
//
// # Safety
//
// `solution` must be a live handle and `buffer` must point to at least
// `capacity` writable `double` slots.
enum JpacStatus jpac_solution_powers(const struct JpacSolution *solution,
                                     double *buffer,
                                     size_t capacity);

// Returns the total transmit power in watts, or NaN for a null handle.
//
// # Safety
//
// `solution` must be null or a live handle from this library.
double jpac_solution_total_power_w(const struct JpacSolution *solution);

// Returns how many links the pipeline dropped, or 0 for a null handle.
//
// Links restored by the readmission pass still count as dropped here; the
// served set already reflects their return.
//
// # Safety
//
// `solution` must be null or a live handle from this library.
uint32_t jpac_solution_removal_count(const struct JpacSolution *solution);

// Releases a solution handle. Passing null is a no-op.
//
// # Safety
//
// `solution` must be null or a handle produced by this library that has not
// been freed yet.
void jpac_solution_free(struct JpacSolution *solution);

// Returns a static, nul-terminated description of a status code.
const char *jpac_status_message(enum JpacStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* JPAC_H */
