#ifndef FSQCA_H
#define FSQCA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Directional expectation per condition.
typedef enum FsqcaExpectation {
  FSQCA_EXPECTATION_AGNOSTIC = 0,
  FSQCA_EXPECTATION_PRESENT = 1,
  FSQCA_EXPECTATION_ABSENT = 2,
} FsqcaExpectation;

typedef enum FsqcaKind {
  FSQCA_KIND_COMPLEX = 0,
  FSQCA_KIND_PARSIMONIOUS = 1,
  FSQCA_KIND_INTERMEDIATE = 2,
} FsqcaKind;

// One literal of a solution term.
typedef enum FsqcaLiteral {
  FSQCA_LITERAL_ABSENT = 0,
  FSQCA_LITERAL_PRESENT = 1,
  FSQCA_LITERAL_DONT_CARE = 2,
} FsqcaLiteral;

typedef enum FsqcaOutcomeCode {
  FSQCA_OUTCOME_CODE_POSITIVE = 0,
  FSQCA_OUTCOME_CODE_NEGATIVE = 1,
  FSQCA_OUTCOME_CODE_REMAINDER = 2,
  FSQCA_OUTCOME_CODE_CONTRADICTION = 3,
} FsqcaOutcomeCode;

// Result of every fallible call.
typedef enum FsqcaStatus {
  FSQCA_STATUS_OK = 0,
  FSQCA_STATUS_NULL_POINTER = 1,
  FSQCA_STATUS_INVALID_UTF8 = 2,
  FSQCA_STATUS_INVALID_ARGUMENT = 3,
  // Input data was rejected (bad file, unknown id, exact 0.5 ...).
  FSQCA_STATUS_DATA = 4,
  // Engine invariant failed.
  FSQCA_STATUS_INTERNAL = 5,
  FSQCA_STATUS_PANIC = 6,
} FsqcaStatus;

// Opaque solution handle.
typedef struct FsqcaSolution FsqcaSolution;

// Opaque truth table handle.
typedef struct FsqcaTruthTable FsqcaTruthTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until
// the next `fsqca_*` call on the same thread; do not free.
const char *fsqca_last_error(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed already.
void fsqca_string_free(char *s);

// Log-odds calibration of `x` with anchors full-in, crossover, full-out.
//
// # Safety
// `out` must be valid for writes.
enum FsqcaStatus fsqca_calibrate(double x,
                                 double full_in,
                                 double crossover,
                                 double full_out,
                                 double *out);

// Bonus band 1..=5 of `value` against a population mean and sd.
//
// # Safety
// `out` must be valid for writes.
enum FsqcaStatus fsqca_bonus_band(double value, double mean, double sd, uint8_t *out);

// Consistency of X as sufficient for Y over `len` cases.
//
// # Safety
// `x` and `y` must point to `len` values; `out` must be valid for writes.
enum FsqcaStatus fsqca_consistency(const double *x, const double *y, size_t len, double *out);

// Coverage of Y by X over `len` cases.
//
// # Safety
// `x` and `y` must point to `len` values; `out` must be valid for writes.
enum FsqcaStatus fsqca_coverage(const double *x, const double *y, size_t len, double *out);

// Builds a truth table from a row-major `n_cases x k` membership matrix
// and an outcome column. Conditions are named `c0..c{k-1}`.
//
// # Safety
// `memberships` must hold `n_cases * k` values, `outcome` `n_cases`
// values, and `out` must be valid for writes.
enum FsqcaStatus fsqca_truth_table_new(const double *memberships,
                                       size_t n_cases,
                                       size_t k,
                                       const double *outcome,
                                       size_t freq_threshold,
                                       double cons_threshold,
                                       struct FsqcaTruthTable **out);

// # Safety
// `t` must come from `fsqca_truth_table_new` and not be used afterwards.
void fsqca_truth_table_free(struct FsqcaTruthTable *t);

// Number of conditions; the table has `1 << k` rows. Returns 0 for null.
//
// # Safety
// `t` must be a live handle or null.
size_t fsqca_truth_table_k(const struct FsqcaTruthTable *t);

// Reads one row. Condition `c0` is the most significant of the `k`
// corner bits, so `corner` reads like the pattern `c0 c1 ...`. A row without
// any membership reports a NaN consistency.
//
// # Safety
// `t` must be a live handle; the out pointers must be valid for writes.
enum FsqcaStatus fsqca_truth_table_row(const struct FsqcaTruthTable *t,
                                       uint32_t corner,
                                       size_t *n_cases,
                                       double *row_consistency,
                                       enum FsqcaOutcomeCode *code);

// Minimizes a table. `kind` is an `FsqcaKind` value. `expectations` may
// be null (all agnostic) or hold one `FsqcaExpectation` value per
// condition.
//
// # Safety
// `t` must be a live handle, `expectations` null or `k` entries long,
// and `out` valid for writes.
enum FsqcaStatus fsqca_solve(const struct FsqcaTruthTable *t,
                             int32_t kind,
                             const int32_t *expectations,
                             struct FsqcaSolution **out);

// # Safety
// `s` must come from `fsqca_solve` and not be used afterwards.
void fsqca_solution_free(struct FsqcaSolution *s);

// Number of terms. Returns 0 for null.
//
// # Safety
// `s` must be a live handle or null.
size_t fsqca_solution_term_count(const struct FsqcaSolution *s);

// Literal of `condition` in `term`, and whether it is a core condition.
//
// # Safety
// `s` must be a live handle; the out pointers must be valid for writes.
enum FsqcaStatus fsqca_solution_literal(const struct FsqcaSolution *s,
                                        size_t term,
                                        size_t condition,
                                        enum FsqcaLiteral *literal,
                                        bool *core);

// Boolean expression such as `c0*~c2 + c1`. Free with `fsqca_string_free`.
// Returns null for a null handle.
//
// # Safety
// `s` must be a live handle or null.
char *fsqca_solution_expression(const struct FsqcaSolution *s);

// Runs the configured pipeline. Outputs go to `out_dir`, or the config's
// own output directory when null. When `bundle_json` is non-null it
// receives the bundle text, freed with `fsqca_string_free`.
//
// # Safety
// `config_path` must be a NUL-terminated string; `out_dir` null or one;
// `bundle_json` null or valid for writes.
enum FsqcaStatus fsqca_run_pipeline(const char *config_path,
                                    const char *out_dir,
                                    char **bundle_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FSQCA_H */
