#ifndef PQM_H
#define PQM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PqmStatus {
  PQM_STATUS_OK = 0,
  PQM_STATUS_PARSE_ERROR = 1,
  PQM_STATUS_TYPE_ERROR = 2,
  PQM_STATUS_NULL_ARGUMENT = 3,
  PQM_STATUS_INVALID_UTF8 = 4,
  PQM_STATUS_PANIC = 5,
} PqmStatus;

typedef enum PqmSemantics {
  PQM_SEMANTICS_BIG = 0,
  PQM_SEMANTICS_SMALL = 1,
  PQM_SEMANTICS_STACKED = 2,
  PQM_SEMANTICS_MACHINE = 3,
} PqmSemantics;

typedef enum PqmOutcomeKind {
  PQM_OUTCOME_KIND_CONVERGED = 0,
  PQM_OUTCOME_KIND_DEADLOCKED = 1,
  PQM_OUTCOME_KIND_FUEL_EXHAUSTED = 2,
} PqmOutcomeKind;

// The result of one evaluation.
typedef struct PqmOutcome PqmOutcome;

// A parsed program with its label context.
typedef struct PqmProgram PqmProgram;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses `src`. Labels without an inputs declaration default to `Qubit`.
//
// # Safety
// `src` must be a NUL-terminated string and `out` a valid pointer.
enum PqmStatus pqm_parse(const char *src, struct PqmProgram **out);

// # Safety
// `p` must be null or a handle from [`pqm_parse`] not yet freed.
void pqm_program_free(struct PqmProgram *p);

// Typechecks `p`; on success `*type_out` receives the printed type.
//
// # Safety
// `p` must be a live program handle and `type_out` a valid pointer.
enum PqmStatus pqm_check(const struct PqmProgram *p, char **type_out);

// Typechecks and evaluates `p` with at most `fuel` steps. Deadlock and fuel
// exhaustion are outcomes, not errors.
//
// # Safety
// `p` must be a live program handle and `out` a valid pointer.
enum PqmStatus pqm_run(const struct PqmProgram *p,
                       enum PqmSemantics semantics,
                       uint64_t fuel,
                       struct PqmOutcome **out);

// # Safety
// `o` must be null or a handle from [`pqm_run`] not yet freed.
void pqm_outcome_free(struct PqmOutcome *o);

// # Safety
// `o` must be a live outcome handle.
enum PqmOutcomeKind pqm_outcome_kind(const struct PqmOutcome *o);

// # Safety
// `o` must be a live outcome handle.
uint64_t pqm_outcome_steps(const struct PqmOutcome *o);

// The printed value, or null unless the run converged.
//
// # Safety
// `o` must be a live outcome handle.
char *pqm_outcome_value(const struct PqmOutcome *o);

// The final circuit as JSON, or null unless the run converged.
//
// # Safety
// `o` must be a live outcome handle.
char *pqm_outcome_circuit_json(const struct PqmOutcome *o);

// One-line description of the outcome.
//
// # Safety
// `o` must be a live outcome handle.
char *pqm_outcome_summary(const struct PqmOutcome *o);

// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void pqm_string_free(char *s);

// Message for the last failed call on this thread, or null. Owned by the
// library; valid until the next call.
const char *pqm_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PQM_H */
