#ifndef QSIEVE_H
#define QSIEVE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum QsStatus {
  QS_STATUS_OK = 0,
  QS_STATUS_NULL_POINTER = 1,
  QS_STATUS_INVALID_UTF8 = 2,
  QS_STATUS_FIELD = 10,
  QS_STATUS_RESIDUE = 11,
  QS_STATUS_UNIT_GENUS = 12,
  QS_STATUS_HECKE = 13,
  QS_STATUS_FREY = 14,
  QS_STATUS_IRRED = 15,
  QS_STATUS_FORMS = 16,
  QS_STATUS_ANALYTIC = 17,
  QS_STATUS_SOLUTIONS = 18,
  QS_STATUS_CONFIG = 19,
  QS_STATUS_IO = 20,
  QS_STATUS_PANIC = 99,
} QsStatus;

/**
 * Opaque handle to a real quadratic field.
 */
typedef struct QsField QsField;

/**
 * Opaque handle to a loaded collection of newform records.
 */
typedef struct QsForms QsForms;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer is
 * valid until the next qsieve call on the same thread.
 */
const char *qs_last_error(void);

/**
 * Release a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from a qsieve call and must not be freed twice.
 */
void qs_string_free(char *s);

/**
 * Build Q(√d) for squarefree d > 1.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum QsStatus qs_field_new(uint64_t d, struct QsField **out);

/**
 * # Safety
 * `f` must come from [`qs_field_new`] and must not be freed twice.
 */
void qs_field_free(struct QsField *f);

/**
 * The radicand d of the field.
 *
 * # Safety
 * `f` and `out` must be valid pointers.
 */
enum QsStatus qs_field_d(const struct QsField *f, uint64_t *out);

/**
 * Field data and fundamental unit as a JSON report.
 *
 * # Safety
 * `f` and `out` must be valid pointers.
 */
enum QsStatus qs_field_classify_json(const struct QsField *f, char **out);

/**
 * Level recipe (candidate levels and Nebentypus) as a JSON report.
 *
 * # Safety
 * `f` and `out` must be valid pointers.
 */
enum QsStatus qs_field_level_json(const struct QsField *f, char **out);

/**
 * Load newform records from a forms file or a directory of them.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum QsStatus qs_forms_load(const char *path, struct QsForms **out);

/**
 * # Safety
 * `f` must come from [`qs_forms_load`] and must not be freed twice.
 */
void qs_forms_free(struct QsForms *f);

/**
 * Number of records in the collection; 0 for NULL.
 *
 * # Safety
 * `f` must be NULL or a valid handle.
 */
size_t qs_forms_len(const struct QsForms *f);

/**
 * Run the trace sieve on every record for primes in [pmin, pmax] using the
 * auxiliary primes `aux[0..aux_len]`, and return the verdicts as JSON.
 *
 * # Safety
 * `field`, `forms` and `out` must be valid; `aux` must point to `aux_len`
 * values.
 */
enum QsStatus qs_sieve_json(const struct QsField *field,
                            const struct QsForms *forms,
                            const uint64_t *aux,
                            size_t aux_len,
                            uint64_t pmin,
                            uint64_t pmax,
                            char **out);

/**
 * Full pipeline for Q(√d) with default configuration. `forms_path` may be
 * NULL to run without newform data.
 *
 * # Safety
 * `forms_path` must be NULL or NUL-terminated; `out` must be valid.
 */
enum QsStatus qs_replay_json(uint64_t d, const char *forms_path, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QSIEVE_H */
