#ifndef PRODINT_H
#define PRODINT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ProdintStatus {
  PRODINT_STATUS_OK = 0,
  PRODINT_STATUS_NULL_POINTER = 1,
  PRODINT_STATUS_INVALID_UTF8 = 2,
  PRODINT_STATUS_PARSE_ERROR = 3,
  PRODINT_STATUS_CONFIG_ERROR = 4,
  PRODINT_STATUS_ANALYSIS_ERROR = 5,
  PRODINT_STATUS_PANIC = 6,
} ProdintStatus;

typedef enum ProdintObligationKind {
  PRODINT_OBLIGATION_KIND_LOWER = 0,
  PRODINT_OBLIGATION_KIND_UPPER = 1,
  PRODINT_OBLIGATION_KIND_ASSERT = 2,
} ProdintObligationKind;

typedef enum ProdintVerdict {
  PRODINT_VERDICT_PROVED = 0,
  PRODINT_VERDICT_UNKNOWN = 1,
} ProdintVerdict;

/**
 * Analysis settings, set by flag name.
 */
typedef struct ProdintConfig ProdintConfig;

/**
 * A parsed program.
 */
typedef struct ProdintProgram ProdintProgram;

/**
 * The outcome of one analysis.
 */
typedef struct ProdintResult ProdintResult;

/**
 * One obligation verdict, copied out of a result.
 */
typedef struct ProdintObligation {
  uint32_t line;
  uint32_t col;
  enum ProdintObligationKind kind;
  enum ProdintVerdict verdict;
} ProdintObligation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses program text. On success `*out` receives a handle to free with
 * [`prodint_program_free`].
 *
 * # Safety
 * `source` must be a NUL-terminated string and `out` a valid pointer.
 */
enum ProdintStatus prodint_program_parse(const char *source, struct ProdintProgram **out);

/**
 * # Safety
 * `p` must come from [`prodint_program_parse`] or be null.
 */
void prodint_program_free(struct ProdintProgram *p);

/**
 * A configuration with defaults: the interval domain alone.
 */
struct ProdintConfig *prodint_config_new(void);

/**
 * Sets one option by its command-line flag name without dashes, such as
 * `domains`, `product`, `reductions`, `power-pivot`, `power-exponent`,
 * `power-atoms`, `array-mode` or `widening-delay`.
 *
 * # Safety
 * `cfg` must come from [`prodint_config_new`]; `key` and `value` must be
 * NUL-terminated strings.
 */
enum ProdintStatus prodint_config_set(struct ProdintConfig *cfg,
                                      const char *key,
                                      const char *value);

/**
 * # Safety
 * `cfg` must come from [`prodint_config_new`] or be null.
 */
void prodint_config_free(struct ProdintConfig *cfg);

/**
 * Analyzes a program. With `oracle` set, the result is also checked against
 * the concrete interpreter. On success `*out` receives a handle to free with
 * [`prodint_result_free`].
 *
 * # Safety
 * `program` and `cfg` must be live handles and `out` a valid pointer.
 */
enum ProdintStatus prodint_analyze(const struct ProdintProgram *program,
                                   const struct ProdintConfig *cfg,
                                   bool oracle,
                                   struct ProdintResult **out);

/**
 * # Safety
 * `r` must be a live result handle or null.
 */
uintptr_t prodint_result_obligation_count(const struct ProdintResult *r);

/**
 * Copies obligation `index` into `*out`.
 *
 * # Safety
 * `r` must be a live result handle and `out` a valid pointer.
 */
enum ProdintStatus prodint_result_obligation(const struct ProdintResult *r,
                                             uintptr_t index,
                                             struct ProdintObligation *out);

/**
 * The command-line exit code for this result: 0 all proved, 1 some unknown,
 * 3 oracle violation. A null handle gives 2.
 *
 * # Safety
 * `r` must be a live result handle or null.
 */
int32_t prodint_result_exit_code(const struct ProdintResult *r);

/**
 * The JSON report as a new string to free with [`prodint_string_free`];
 * null on failure.
 *
 * # Safety
 * `r` must be a live result handle or null.
 */
char *prodint_result_to_json(const struct ProdintResult *r);

/**
 * # Safety
 * `r` must come from [`prodint_analyze`] or be null.
 */
void prodint_result_free(struct ProdintResult *r);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void prodint_string_free(char *s);

/**
 * The message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *prodint_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PRODINT_H */
