#ifndef OKSVM_H
#define OKSVM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum OksvmStatus {
  OKSVM_STATUS_OK = 0,
  OKSVM_STATUS_NULL_POINTER = 1,
  OKSVM_STATUS_INVALID_ARGUMENT = 2,
  OKSVM_STATUS_INVALID_DATA = 3,
  OKSVM_STATUS_SINGLE_CLASS = 4,
  OKSVM_STATUS_DEGENERATE_MODEL = 5,
  OKSVM_STATUS_DIMENSION_MISMATCH = 6,
  OKSVM_STATUS_IO = 7,
  OKSVM_STATUS_FORMAT = 8,
  OKSVM_STATUS_PANIC = 99,
} OksvmStatus;

typedef enum OksvmTermination {
  /**
   * Not an OKSVM run.
   */
  OKSVM_TERMINATION_NONE = 0,
  OKSVM_TERMINATION_CONVERGED = 1,
  OKSVM_TERMINATION_GAMMA_EXCEEDED = 2,
  OKSVM_TERMINATION_STAGNATED = 3,
  OKSVM_TERMINATION_STEP_CAP = 4,
} OksvmTermination;

/**
 * Opaque dataset handle.
 */
typedef struct OksvmDataset OksvmDataset;

/**
 * Opaque model handle.
 */
typedef struct OksvmModel OksvmModel;

typedef struct OksvmSolverOptions {
  double kkt_tolerance;
  /**
   * Pair updates per solve; 0 selects `10 * N^2`.
   */
  size_t max_iterations;
  double support_threshold;
} OksvmSolverOptions;

typedef struct OksvmOptions {
  double gamma0;
  double eta0;
  double zeta_plus;
  double zeta_minus;
  double gamma_max;
  double epsilon;
  size_t ws_limit;
  size_t max_outer_steps;
  bool warm_start;
} OksvmOptions;

typedef struct OksvmTrainReport {
  double final_gamma;
  size_t outer_steps;
  enum OksvmTermination terminated_by;
  /**
   * Solver converged and the outer loop did not stop on the step cap.
   */
  bool converged;
} OksvmTrainReport;

typedef struct OksvmMetrics {
  double acc;
  double precision;
  double recall;
  double f1;
  double auc;
  size_t tp;
  size_t fp;
  size_t tn;
  size_t fn_;
} OksvmMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null after a
 * success. The pointer stays valid until the next call on this thread.
 */
const char *oksvm_last_error_message(void);

/**
 * Copies `n_samples * n_features` row-major values and `n_samples` labels
 * (each -1 or +1) into a new dataset.
 *
 * # Safety
 * `features` and `labels` must point to arrays of the stated lengths and
 * `out` to writable storage for one pointer.
 */
enum OksvmStatus oksvm_dataset_new(const double *features,
                                   size_t n_samples,
                                   size_t n_features,
                                   const int8_t *labels,
                                   struct OksvmDataset **out);

/**
 * Two balanced Gaussian blobs with centres `2 * sep` apart.
 *
 * # Safety
 * `out` must point to writable storage for one pointer.
 */
enum OksvmStatus oksvm_dataset_generate(size_t n_samples,
                                        size_t dim,
                                        double sep,
                                        uint64_t seed,
                                        struct OksvmDataset **out);

/**
 * Loads a headered CSV; rows whose `label_column` equals `positive_label`
 * become +1, all others -1.
 *
 * # Safety
 * String arguments must be valid NUL-terminated strings and `out` must
 * point to writable storage for one pointer.
 */
enum OksvmStatus oksvm_dataset_load_csv(const char *path,
                                        const char *label_column,
                                        const char *positive_label,
                                        struct OksvmDataset **out);

/**
 * Stratified split into two new datasets.
 *
 * # Safety
 * `ds` must be a live dataset handle; `train` and `test` must point to
 * writable storage for one pointer each.
 */
enum OksvmStatus oksvm_dataset_split(const struct OksvmDataset *ds,
                                     double test_fraction,
                                     uint64_t seed,
                                     struct OksvmDataset **train,
                                     struct OksvmDataset **test);

/**
 * Number of rows, or 0 for a null handle.
 *
 * # Safety
 * `ds` must be null or a live dataset handle.
 */
size_t oksvm_dataset_n_samples(const struct OksvmDataset *ds);

/**
 * Number of features, or 0 for a null handle.
 *
 * # Safety
 * `ds` must be null or a live dataset handle.
 */
size_t oksvm_dataset_n_features(const struct OksvmDataset *ds);

/**
 * # Safety
 * `ds` must be null or a handle not yet freed.
 */
void oksvm_dataset_free(struct OksvmDataset *ds);

struct OksvmSolverOptions oksvm_solver_options_default(void);

struct OksvmOptions oksvm_options_default(void);

/**
 * Plain SVM at fixed `(c, gamma)`. `solver` may be null for defaults.
 *
 * # Safety
 * `train` must be a live dataset handle, `solver` null or valid, and `out`
 * writable storage for one pointer.
 */
enum OksvmStatus oksvm_train_svm(const struct OksvmDataset *train,
                                 double c,
                                 double gamma,
                                 const struct OksvmSolverOptions *solver,
                                 struct OksvmModel **out);

/**
 * SVM with the kernel width learned from `options.gamma0`. `options` and
 * `solver` may be null for defaults; `report` may be null.
 *
 * # Safety
 * `train` must be a live dataset handle, the option pointers null or
 * valid, `out` writable storage for one pointer and `report` null or
 * writable.
 */
enum OksvmStatus oksvm_train_oksvm(const struct OksvmDataset *train,
                                   double c,
                                   const struct OksvmOptions *options,
                                   const struct OksvmSolverOptions *solver,
                                   struct OksvmModel **out,
                                   struct OksvmTrainReport *report);

/**
 * Writes one decision value per row of the row-major `features` matrix.
 *
 * # Safety
 * `model` must be a live model handle, `features` must hold
 * `n_rows * n_features` values and `out` room for `n_rows` values.
 */
enum OksvmStatus oksvm_model_decision_values(const struct OksvmModel *model,
                                             const double *features,
                                             size_t n_rows,
                                             size_t n_features,
                                             double *out);

/**
 * Writes one label (-1 or +1) per row; a score of exactly 0 gives +1.
 *
 * # Safety
 * As for [`oksvm_model_decision_values`], with `out` holding `n_rows` bytes.
 */
enum OksvmStatus oksvm_model_predict(const struct OksvmModel *model,
                                     const double *features,
                                     size_t n_rows,
                                     size_t n_features,
                                     int8_t *out);

/**
 * Scores `test` and fills `out` with all metrics.
 *
 * # Safety
 * `model` and `test` must be live handles and `out` writable.
 */
enum OksvmStatus oksvm_model_evaluate(const struct OksvmModel *model,
                                      const struct OksvmDataset *test,
                                      struct OksvmMetrics *out);

/**
 * Kernel width of the model, or NaN for a null handle.
 *
 * # Safety
 * `model` must be null or a live model handle.
 */
double oksvm_model_gamma(const struct OksvmModel *model);

/**
 * # Safety
 * `model` must be null or a live model handle.
 */
double oksvm_model_c(const struct OksvmModel *model);

/**
 * # Safety
 * `model` must be null or a live model handle.
 */
double oksvm_model_bias(const struct OksvmModel *model);

/**
 * # Safety
 * `model` must be null or a live model handle.
 */
size_t oksvm_model_n_support(const struct OksvmModel *model);

/**
 * # Safety
 * `model` must be null or a live model handle.
 */
size_t oksvm_model_n_features(const struct OksvmModel *model);

/**
 * # Safety
 * `model` must be a live model handle and `path` a NUL-terminated string.
 */
enum OksvmStatus oksvm_model_save(const struct OksvmModel *model, const char *path);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable storage for
 * one pointer.
 */
enum OksvmStatus oksvm_model_load(const char *path, struct OksvmModel **out);

/**
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void oksvm_model_free(struct OksvmModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OKSVM_H */
