/* joinmi C API. See README for usage. */

#ifndef JOINMI_H
#define JOINMI_H

/* This file is generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes for every fallible entry point.
 */
typedef enum JmiStatus {
  JMI_STATUS_OK = 0,
  JMI_STATUS_IO_ERROR = 1,
  JMI_STATUS_PARSE_ERROR = 2,
  JMI_STATUS_INVALID_ARGUMENT = 3,
  JMI_STATUS_EMPTY_JOIN = 4,
  JMI_STATUS_ESTIMATOR_ERROR = 5,
  JMI_STATUS_OTHER_ERROR = 99,
} JmiStatus;

/**
 * Sketch construction methods.
 */
typedef enum JmiMethod {
  JMI_METHOD_TUPSK = 0,
  JMI_METHOD_LV2SK = 1,
  JMI_METHOD_PRISK = 2,
  JMI_METHOD_INDSK = 3,
  JMI_METHOD_CSK = 4,
} JmiMethod;

/**
 * Which table side a sketch summarizes.
 */
typedef enum JmiSide {
  JMI_SIDE_TRAIN = 0,
  JMI_SIDE_AUG = 1,
} JmiSide;

/**
 * Aggregate applied to repeated aug-side keys.
 */
typedef enum JmiAgg {
  JMI_AGG_AVG = 0,
  JMI_AGG_SUM = 1,
  JMI_AGG_MIN = 2,
  JMI_AGG_MAX = 3,
  JMI_AGG_COUNT = 4,
  JMI_AGG_MODE = 5,
  JMI_AGG_FIRST = 6,
} JmiAgg;

/**
 * Estimator selector; Auto applies the type-based dispatch rule.
 */
typedef enum JmiEstimator {
  JMI_ESTIMATOR_AUTO = 0,
  JMI_ESTIMATOR_MLE = 1,
  JMI_ESTIMATOR_KSG = 2,
  JMI_ESTIMATOR_MIXED_KSG = 3,
  JMI_ESTIMATOR_DC_KSG = 4,
} JmiEstimator;

/**
 * Opaque sketch handle.
 */
typedef struct JmiSketch JmiSketch;

/**
 * Opaque table handle.
 */
typedef struct JmiTable JmiTable;

/**
 * A completed estimate.
 */
typedef struct JmiEstimate {
  /**
   * Mutual information in nats.
   */
  double value_nats;
  /**
   * Sample size the estimate was computed on.
   */
  size_t n;
  /**
   * Estimator actually used (never Auto).
   */
  enum JmiEstimator estimator;
} JmiEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message for this thread into `buf` (NUL
 * terminated, truncated to `cap` bytes). Returns the full message length
 * excluding the terminator. Safe to call with `buf == NULL` to query the
 * length.
 *
 * # Safety
 * `buf` must be NULL or valid for writes of `cap` bytes.
 */
size_t jmi_last_error(char *buf, size_t cap);

/**
 * Loads a (key column, value column) pair from a CSV file.
 *
 * # Safety
 * `path`, `key_column`, `value_column` must be NUL-terminated strings;
 * `out` must be a valid pointer.
 */
enum JmiStatus jmi_table_load_csv(const char *path,
                                  const char *key_column,
                                  const char *value_column,
                                  char delimiter,
                                  struct JmiTable **out);

/**
 * Number of rows in the table.
 *
 * # Safety
 * `table` must be a live handle from this library.
 */
size_t jmi_table_len(const struct JmiTable *table);

/**
 * Frees a table handle. NULL is a no-op.
 *
 * # Safety
 * `table` must be NULL or a live handle; it is invalid afterwards.
 */
void jmi_table_free(struct JmiTable *table);

/**
 * Builds a sketch of a table side with the given budget.
 *
 * # Safety
 * `table` must be a live handle; `out` must be valid.
 */
enum JmiStatus jmi_sketch_build(const struct JmiTable *table,
                                enum JmiMethod method,
                                enum JmiSide side,
                                size_t n,
                                enum JmiAgg agg,
                                uint64_t seed,
                                struct JmiSketch **out);

/**
 * Number of entries in the sketch.
 *
 * # Safety
 * `sketch` must be a live handle from this library.
 */
size_t jmi_sketch_len(const struct JmiSketch *sketch);

/**
 * Writes the sketch as canonical JSON to `path`.
 *
 * # Safety
 * `sketch` must be a live handle; `path` a NUL-terminated string.
 */
enum JmiStatus jmi_sketch_save_json(const struct JmiSketch *sketch, const char *path);

/**
 * Loads a sketch from a JSON file produced by `jmi_sketch_save_json` or
 * the CLI.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be valid.
 */
enum JmiStatus jmi_sketch_load_json(const char *path, struct JmiSketch **out);

/**
 * Frees a sketch handle. NULL is a no-op.
 *
 * # Safety
 * `sketch` must be NULL or a live handle; it is invalid afterwards.
 */
void jmi_sketch_free(struct JmiSketch *sketch);

/**
 * Joins a train/aug sketch pair and estimates MI on the recovered
 * sample.
 *
 * # Safety
 * `train` and `aug` must be live handles; `out` must be valid.
 */
enum JmiStatus jmi_estimate_sketch_join(const struct JmiSketch *train,
                                        const struct JmiSketch *aug,
                                        enum JmiEstimator estimator,
                                        size_t k,
                                        struct JmiEstimate *out);

/**
 * Materializes the full left join of two tables and estimates MI on it.
 *
 * # Safety
 * `train` and `aug` must be live handles; `out` must be valid.
 */
enum JmiStatus jmi_estimate_full_join(const struct JmiTable *train,
                                      const struct JmiTable *aug,
                                      enum JmiAgg agg,
                                      enum JmiEstimator estimator,
                                      size_t k,
                                      struct JmiEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* JOINMI_H */
