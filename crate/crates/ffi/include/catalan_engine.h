#ifndef CATALAN_ENGINE_H
#define CATALAN_ENGINE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  CATALAN_STATUS_OK = 0,
  CATALAN_STATUS_INVALID_ARGUMENT = 1,
  CATALAN_STATUS_NON_INTEGRAL = 2,
  CATALAN_STATUS_PARSE = 3,
  CATALAN_STATUS_RESOURCE = 4,
  CATALAN_STATUS_IO = 5,
  CATALAN_STATUS_VERIFICATION = 6,
  CATALAN_STATUS_INTERNAL = 7,
  CATALAN_STATUS_NULL_POINTER = 8,
  CATALAN_STATUS_PANIC = 9,
} CatalanStatus;

typedef enum {
  CATALAN_TIER_EXACT = 0,
  CATALAN_TIER_ESTIMATE = 1,
  CATALAN_TIER_UNCONFIRMED = 2,
} CatalanTier;

/**
 * A grouped prime factorization.
 */
typedef struct CatalanFactorization CatalanFactorization;

/**
 * A reconstructed nonnegative integer.
 */
typedef struct CatalanNatural CatalanNatural;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer is
 * valid until the next call into this library on the same thread.
 */
const char *catalan_last_error_message(void);

/**
 * Factorization of C(n). `workers` = 0 uses every core.
 *
 * # Safety
 * `result` must be a valid pointer to writable storage for one pointer.
 */
CatalanStatus catalan_factorization_new_catalan(uint64_t n,
                                                size_t workers,
                                                CatalanFactorization **result);

/**
 * Factorization of `Π num[i]! / Π den[j]!`. Fails with
 * `CATALAN_STATUS_NON_INTEGRAL` when the ratio is not an integer.
 *
 * # Safety
 * `num` and `den` must point to `num_len` and `den_len` readable values
 * (either may be NULL when its length is 0). `result` must be writable.
 */
CatalanStatus catalan_factorization_new_ratio(const uint64_t *num,
                                              size_t num_len,
                                              const uint64_t *den,
                                              size_t den_len,
                                              size_t workers,
                                              CatalanFactorization **result);

/**
 * Reads a factorization file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `result` must be writable.
 */
CatalanStatus catalan_factorization_read_file(const char *path, CatalanFactorization **result);

/**
 * Writes the factorization in the text format to `path`.
 *
 * # Safety
 * `f` must be a live handle and `path` a NUL-terminated string.
 */
CatalanStatus catalan_factorization_write_file(const CatalanFactorization *f, const char *path);

/**
 * # Safety
 * `f` must be NULL or a handle not yet freed.
 */
void catalan_factorization_free(CatalanFactorization *f);

/**
 * # Safety
 * `f` must be a live handle.
 */
uint64_t catalan_factorization_prime_count(const CatalanFactorization *f);

/**
 * # Safety
 * `f` must be a live handle.
 */
size_t catalan_factorization_group_count(const CatalanFactorization *f);

/**
 * Group `index` (descending exponent order). `primes` receives a pointer
 * into the handle, valid until it is freed.
 *
 * # Safety
 * `f` must be a live handle; the out pointers must be writable.
 */
CatalanStatus catalan_factorization_group(const CatalanFactorization *f,
                                          size_t index,
                                          uint64_t *exponent,
                                          const uint64_t **primes,
                                          size_t *len);

/**
 * Decimal digit estimate; `exact` is set when it is guaranteed correct.
 *
 * # Safety
 * `f` must be a live handle; the out pointers must be writable.
 */
CatalanStatus catalan_factorization_estimated_digits(const CatalanFactorization *f,
                                                     uint64_t *digits,
                                                     bool *exact);

/**
 * The factorized value modulo `modulus` (at least 2).
 *
 * # Safety
 * `f` must be a live handle; `result` must be writable.
 */
CatalanStatus catalan_factorization_modular_value(const CatalanFactorization *f,
                                                  uint64_t modulus,
                                                  uint64_t *result);

/**
 * Multiplies the factorization out. `chunk_size` = 0 uses the default.
 *
 * # Safety
 * `f` must be a live handle; `result` must be writable.
 */
CatalanStatus catalan_reconstruct(const CatalanFactorization *f,
                                  size_t chunk_size,
                                  CatalanNatural **result);

/**
 * # Safety
 * `v` must be NULL or a handle not yet freed.
 */
void catalan_natural_free(CatalanNatural *v);

/**
 * # Safety
 * `v` must be a live handle.
 */
uint64_t catalan_natural_bit_length(const CatalanNatural *v);

/**
 * # Safety
 * `v` must be a live handle.
 */
uint64_t catalan_natural_decimal_digits(const CatalanNatural *v);

/**
 * Writes the headerless magnitude to `path` and its SHA-256 (64 hex chars
 * plus NUL) to `sha256_hex`, which may be NULL.
 *
 * # Safety
 * `v` must be a live handle, `path` NUL-terminated, and `sha256_hex` NULL or
 * at least 65 writable bytes.
 */
CatalanStatus catalan_natural_write_binary(const CatalanNatural *v,
                                           const char *path,
                                           bool big_endian,
                                           char *sha256_hex);

/**
 * Decimal string of the value; release it with [`catalan_string_free`].
 *
 * # Safety
 * `v` must be a live handle; `result` must be writable.
 */
CatalanStatus catalan_natural_to_decimal(const CatalanNatural *v, char **result);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library and not yet freed.
 */
void catalan_string_free(char *s);

/**
 * The `n` chosen for a `digits`-digit Catalan number. Sets `found` to false
 * when no `n` has exactly that many digits.
 *
 * # Safety
 * All out pointers must be writable.
 */
CatalanStatus catalan_solve_digits(uint64_t digits, uint64_t *n, CatalanTier *tier, bool *found);

/**
 * SHA-256 of a file as 64 lowercase hex chars plus NUL.
 *
 * # Safety
 * `path` must be NUL-terminated; `sha256_hex` must hold 65 bytes.
 */
CatalanStatus catalan_sha256_file(const char *path, char *sha256_hex);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CATALAN_ENGINE_H */
