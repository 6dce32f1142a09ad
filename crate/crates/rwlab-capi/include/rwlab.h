#ifndef RWLAB_H
#define RWLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible function.
typedef enum RwStatus {
  // Success.
  RW_STATUS_OK = 0,
  // A pointer argument was null.
  RW_STATUS_NULL_POINTER = 1,
  // A string argument was not valid UTF-8.
  RW_STATUS_INVALID_UTF8 = 2,
  // Input text failed to parse or violated an invariant.
  RW_STATUS_PARSE_ERROR = 3,
  // Arguments were structurally valid but out of domain.
  RW_STATUS_INVALID_ARGUMENT = 4,
  // The requested cut does not exist (`[x, 1]` is worth less than
  // `alpha`); not an error for transcripts, but surfaced as a status
  // here so callers need no sentinel encoding.
  RW_STATUS_NO_SUCH_CUT = 5,
} RwStatus;

// Opaque adversarial instance handle.
typedef struct RwInstance RwInstance;

// Opaque piecewise-constant valuation handle.
typedef struct RwValuation RwValuation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Frees a string returned by this library. Passing null is a no-op.
//
// # Safety
// `s` must have been returned by an `rwlab_*` function and not freed
// before.
void rwlab_string_free(char *s);

// Library version as a static string; do not free.
const char *rwlab_version(void);

// The query budget `8 * floor((n - 1) / 32)^2`. Requires `n >= 33`.
enum RwStatus rwlab_query_budget(uint32_t n, uint64_t *out);

// Parses a valuation from its text record
// (`<b0> <d0> <b1> <d1> ... <bk>`, rationals as `p/q`).
//
// # Safety
// `text` must be a valid NUL-terminated string; `out` must be a valid
// pointer.
enum RwStatus rwlab_valuation_parse(const char *text, struct RwValuation **out);

// Frees a valuation handle. Passing null is a no-op.
//
// # Safety
// `v` must have come from `rwlab_valuation_parse` and not been freed.
void rwlab_valuation_free(struct RwValuation *v);

// `eval` query: writes the value of `[x, y]` as a `p/q` string.
//
// # Safety
// `v` must be a live valuation handle; `x`, `y` valid strings; `out` a
// valid pointer.
enum RwStatus rwlab_valuation_eval(const struct RwValuation *v,
                                   const char *x,
                                   const char *y,
                                   char **out);

// `cut` query: writes the minimal `y` with `[x, y]` worth `alpha`, or
// returns `NoSuchCut`.
//
// # Safety
// Same contract as `rwlab_valuation_eval`.
enum RwStatus rwlab_valuation_cut(const struct RwValuation *v,
                                  const char *x,
                                  const char *alpha,
                                  char **out);

// Builds an adversarial instance (`n >= 33`).
enum RwStatus rwlab_instance_build(uint32_t n, uint64_t seed, struct RwInstance **out);

// Parses an instance from its text record.
//
// # Safety
// `text` must be a valid NUL-terminated string; `out` a valid pointer.
enum RwStatus rwlab_instance_parse(const char *text, struct RwInstance **out);

// Serializes an instance to its text record.
//
// # Safety
// `instance` must be a live handle; `out` a valid pointer.
enum RwStatus rwlab_instance_to_text(const struct RwInstance *instance, char **out);

// Frees an instance handle. Passing null is a no-op.
//
// # Safety
// `instance` must have come from this library and not been freed.
void rwlab_instance_free(struct RwInstance *instance);

// Runs the full attack pipeline on serialized allocation + transcript
// against an instance handle; writes the verdict text record.
//
// # Safety
// `instance` must be a live handle; the text arguments valid strings;
// `out` a valid pointer.
enum RwStatus rwlab_attack(const struct RwInstance *instance,
                           const char *allocation_text,
                           const char *transcript_text,
                           char **out);

// `exp(-m/128)`.
enum RwStatus rwlab_hoeffding_tail_bound(uint32_t m, double *out);

// Exact enumerated tail probability at `m = 32`, as a `p/q` string.
enum RwStatus rwlab_exact_split_tail(uint32_t m, char **out);

// Natural log of the union-bound expression at scale `m` (a positive
// multiple of 32).
enum RwStatus rwlab_union_bound_log(uint32_t m, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RWLAB_H */
