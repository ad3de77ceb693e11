#ifndef EQBUNDLE_H
#define EQBUNDLE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EqbStatus {
  EQB_STATUS_OK = 0,
  EQB_STATUS_NULL_POINTER = 1,
  EQB_STATUS_INVALID_UTF8 = 2,
  EQB_STATUS_PARSE = 3,
  /**
   * The input parsed but is not valid data (failed validation).
   */
  EQB_STATUS_INVALID = 4,
  /**
   * A computation rejected its arguments.
   */
  EQB_STATUS_DOMAIN = 5,
  EQB_STATUS_PANIC = 6,
} EqbStatus;

/**
 * Opaque Kaneyama data handle.
 */
typedef struct EqbData EqbData;

/**
 * Opaque fan handle.
 */
typedef struct EqbFan EqbFan;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or an empty string.
 * The pointer stays valid until the next call into this library.
 */
const char *eqb_last_error_message(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void eqb_string_free(char *s);

/**
 * # Safety
 * `json` must be a valid C string; `out` must be writable.
 */
enum EqbStatus eqb_fan_from_json(const char *json, struct EqbFan **out);

/**
 * # Safety
 * `out` must be writable.
 */
enum EqbStatus eqb_fan_projective_space(size_t n, struct EqbFan **out);

/**
 * Kleinschmidt fan with `s` and the `r` nondecreasing twists in `a`.
 *
 * # Safety
 * `a` must point to `r` readable integers; `out` must be writable.
 */
enum EqbStatus eqb_fan_kleinschmidt(size_t s, const int64_t *a, size_t r, struct EqbFan **out);

/**
 * # Safety
 * `fan` must be a live handle; `out` must be writable.
 */
enum EqbStatus eqb_fan_to_json(const struct EqbFan *fan, char **out);

/**
 * # Safety
 * `fan` must be null or a handle from this library, not yet freed.
 */
void eqb_fan_free(struct EqbFan *fan);

/**
 * Parses Kaneyama data. Parsing does not validate; see
 * [`eqb_data_validate`].
 *
 * # Safety
 * `json` must be a valid C string; `out` must be writable.
 */
enum EqbStatus eqb_data_from_json(const char *json, struct EqbData **out);

/**
 * # Safety
 * `data` must be a live handle; `out` must be writable.
 */
enum EqbStatus eqb_data_to_json(const struct EqbData *data, char **out);

/**
 * Tangent frame bundle data of a fan.
 *
 * # Safety
 * `fan` must be a live handle; `out` must be writable.
 */
enum EqbStatus eqb_data_tangent(const struct EqbFan *fan, struct EqbData **out);

/**
 * Extends GL(r) data to SL(r+1) by `A ↦ diag(A, det A^-1)`.
 *
 * # Safety
 * `data` must be a live handle; `out` must be writable.
 */
enum EqbStatus eqb_data_extend_sl_balance(const struct EqbData *data, struct EqbData **out);

/**
 * Writes `1` to `valid` when every rule passes and `0` otherwise; the
 * full report is written as JSON to `report` when it is not null.
 *
 * # Safety
 * `data` must be a live handle; `valid` must be writable; `report` must
 * be null or writable.
 */
enum EqbStatus eqb_data_validate(const struct EqbData *data, int32_t *valid, char **report);

/**
 * Dimension of the automorphism Lie algebra in the frame of cone `base`.
 *
 * # Safety
 * `data` must be a live handle; `dim` must be writable.
 */
enum EqbStatus eqb_data_aut_dim(const struct EqbData *data, size_t base, size_t *dim);

/**
 * Automorphism Lie algebra summary as JSON.
 *
 * # Safety
 * `data` must be a live handle; `out` must be writable.
 */
enum EqbStatus eqb_data_aut_json(const struct EqbData *data, size_t base, char **out);

/**
 * Splitting verdict as JSON.
 *
 * # Safety
 * `data` must be a live handle; `out` must be writable.
 */
enum EqbStatus eqb_data_split_json(const struct EqbData *data,
                                   size_t base,
                                   uint32_t attempts,
                                   uint64_t seed,
                                   char **out);

/**
 * # Safety
 * `data` must be null or a handle from this library, not yet freed.
 */
void eqb_data_free(struct EqbData *data);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EQBUNDLE_H */
