/* rankkit - rank-based feature normalization and score re-ranking toolkit.
 *
 * C API for the shared library. All functions return rk_status; RK_OK means
 * success. On failure, rk_last_error() returns a thread-local message for
 * the most recent failing call on the calling thread.
 *
 * Handles are opaque and must be released with their matching _free function.
 * Out-parameters are written only on success. Strings returned through
 * `char**` out-parameters are heap-allocated and must be released with
 * rk_str_free().
 */

#ifndef RANKKIT_H
#define RANKKIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RK_API __declspec(dllexport)
#else
#define RK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rk_status {
    RK_OK = 0,
    RK_ERROR_INVALID_ARGUMENT = 1,
    RK_ERROR_DIMENSION_MISMATCH = 2,
    RK_ERROR_NOT_FINITE = 3,
    RK_ERROR_IO = 4,
    RK_ERROR_FORMAT = 5,
    RK_ERROR_DOMAIN = 6,
    RK_ERROR_DIVERGED = 7,
    RK_ERROR_INTERNAL = 8
} rk_status;

/* Dense row-major matrix of 64-bit floats. Used both for feature matrices
 * (rows = samples, cols = dimensions) and score matrices (cols = classes). */
typedef struct rk_matrix rk_matrix;

/* Integer class label per sample. */
typedef struct rk_labels rk_labels;

/* Per-dimension sorted seed values for out-of-sample approximate ranking. */
typedef struct rk_rank_ref rk_rank_ref;

/* Ordered list of normalization steps. */
typedef struct rk_pipeline rk_pipeline;

/* One-vs-rest linear classifier (weights, biases, hyperparameters). */
typedef struct rk_model rk_model;

/* ------------------------------------------------------------------ */
/* Library                                                            */
/* ------------------------------------------------------------------ */

RK_API const char* rk_version(void);

/* Message for the last failing call on this thread. Never NULL. */
RK_API const char* rk_last_error(void);

/* Worker threads used by parallel kernels. n < 1 resets to 1.
 * Results are bit-identical for every thread count. */
RK_API void rk_set_threads(int n);
RK_API int rk_threads(void);

RK_API void rk_str_free(char* s);

/* ------------------------------------------------------------------ */
/* Matrices                                                           */
/* ------------------------------------------------------------------ */

/* data is copied, row-major, rows*cols values; NULL means all zeros. */
RK_API rk_status rk_matrix_create(size_t rows, size_t cols, const double* data,
                                  rk_matrix** out);
RK_API void rk_matrix_free(rk_matrix* m);
RK_API size_t rk_matrix_rows(const rk_matrix* m);
RK_API size_t rk_matrix_cols(const rk_matrix* m);
RK_API const double* rk_matrix_data(const rk_matrix* m);

/* Checks shape and that every value is finite. */
RK_API rk_status rk_matrix_validate(const rk_matrix* m);

/* format: "csv" or "binary". csv_header skips the first line on read. */
RK_API rk_status rk_matrix_read(const char* path, const char* format,
                                int csv_header, rk_matrix** out);
RK_API rk_status rk_matrix_write(const rk_matrix* m, const char* path,
                                 const char* format);

/* ------------------------------------------------------------------ */
/* Labels                                                             */
/* ------------------------------------------------------------------ */

RK_API rk_status rk_labels_create(size_t count, const int64_t* labels,
                                  rk_labels** out);
RK_API void rk_labels_free(rk_labels* l);
RK_API size_t rk_labels_count(const rk_labels* l);
RK_API const int64_t* rk_labels_data(const rk_labels* l);

/* Text format: one integer per line. */
RK_API rk_status rk_labels_read(const char* path, rk_labels** out);
RK_API rk_status rk_labels_write(const rk_labels* l, const char* path);

/* ------------------------------------------------------------------ */
/* Normalization                                                      */
/* ------------------------------------------------------------------ */

/* Rows with nonzero Euclidean norm are scaled to unit norm; all-zero rows
 * pass through unchanged. */
RK_API rk_status rk_l2_normalize(const rk_matrix* m, rk_matrix** out);

/* Element-wise sign(z)|z|^alpha with alpha in [0,1]; 0 maps to 0. */
RK_API rk_status rk_power_normalize(const rk_matrix* m, double alpha,
                                    rk_matrix** out);

/* Per dimension, replaces each value by its 1-based ascending rank divided
 * by the number of rows. tie: "average", "min", "max" or "stable_order". */
RK_API rk_status rk_rank_normalize_exact(const rk_matrix* m, const char* tie,
                                         rk_matrix** out);

/* Samples subset_size distinct rows (without replacement, deterministic in
 * seed) and stores their values per dimension, sorted ascending. */
RK_API rk_status rk_fit_rank_reference(const rk_matrix* m, size_t subset_size,
                                       uint64_t seed, rk_rank_ref** out);
RK_API void rk_rank_ref_free(rk_rank_ref* r);
RK_API size_t rk_rank_ref_subset_size(const rk_rank_ref* r);
RK_API size_t rk_rank_ref_dims(const rk_rank_ref* r);

/* Writes the seed matrix at `path` (binary matrix format) and a JSON sidecar
 * at `path`.json. Load expects both files. */
RK_API rk_status rk_rank_ref_save(const rk_rank_ref* r, const char* path);
RK_API rk_status rk_rank_ref_load(const char* path, rk_rank_ref** out);

/* Each value becomes (number of seeds strictly below it) / subset_size. */
RK_API rk_status rk_rank_normalize_approx(const rk_matrix* m,
                                          const rk_rank_ref* ref,
                                          rk_matrix** out);

/* Exact rank normalization applied independently inside each group. All
 * groups must share the column count. outs must hold n_groups slots. */
RK_API rk_status rk_within_group_rank_normalize(const rk_matrix* const* groups,
                                                size_t n_groups,
                                                const char* tie,
                                                rk_matrix** outs);

/* ------------------------------------------------------------------ */
/* Pipelines                                                          */
/* ------------------------------------------------------------------ */

/* Parses a pipeline description such as
 *   {"steps":[{"rank_exact":{"tie":"average"}},{"l2":{}}]}
 * Step kinds: "l2", "power" (alpha), "rank_exact" (tie),
 * "rank_approx" (s + seed to fit from the input, or {} to use a supplied
 * reference), "within_group_rank" (tie). Unknown keys are rejected. */
RK_API rk_status rk_pipeline_parse(const char* json, rk_pipeline** out);
RK_API void rk_pipeline_free(rk_pipeline* p);
RK_API rk_status rk_pipeline_to_json(const rk_pipeline* p, char** out_json);

/* Applies steps left to right. `ref` may be NULL unless a rank_approx step
 * requires a supplied reference. If fitted_out is non-NULL and a rank_approx
 * step fits a reference from its input, the last such reference is returned
 * through it (NULL if none was fitted). */
RK_API rk_status rk_pipeline_apply(const rk_matrix* m, const rk_pipeline* p,
                                   const rk_rank_ref* ref, rk_matrix** out);
RK_API rk_status rk_pipeline_apply_fit(const rk_matrix* m,
                                       const rk_pipeline* p,
                                       const rk_rank_ref* ref, rk_matrix** out,
                                       rk_rank_ref** fitted_out);

/* ------------------------------------------------------------------ */
/* Score re-ranking                                                   */
/* ------------------------------------------------------------------ */

/* Multi-class iterative re-ranking. Runs iters-1 synchronous update sweeps;
 * sweep w (1-based) subtracts eta^(w-1) * sum_r exp(-beta*r) * delta(r)
 * where delta is the descending sort of the row's other scores. */
RK_API rk_status rk_mir_rerank(const rk_matrix* scores, double eta,
                               double beta, size_t iters, rk_matrix** out);

/* Same, additionally returning a JSON trace with per-iteration snapshots
 * and max absolute update magnitudes. */
RK_API rk_status rk_mir_rerank_traced(const rk_matrix* scores, double eta,
                                      double beta, size_t iters,
                                      rk_matrix** out, char** trace_json);

/* mode: "per_row" or "global". Affine map onto [0,1]; constant rows (or a
 * constant matrix) map to 0.5 everywhere. */
RK_API rk_status rk_minmax_normalize_scores(const rk_matrix* scores,
                                            const char* mode, rk_matrix** out);

/* Row min-max normalized then sorted descending. out must hold cols values. */
RK_API rk_status rk_rolloff_profile(const rk_matrix* scores, size_t row,
                                    double* out);

/* ------------------------------------------------------------------ */
/* Classification                                                     */
/* ------------------------------------------------------------------ */

/* One-vs-rest linear classifier trained by full-batch gradient descent on
 * the L2-regularized squared-hinge objective. Deterministic in inputs and
 * seed; the seed only feeds optional init_noise (0 = zero init). */
RK_API rk_status rk_train_linear_ovr(const rk_matrix* x, const rk_labels* y,
                                     double c, size_t epochs,
                                     double learning_rate, double init_noise,
                                     uint64_t seed, rk_model** out);
RK_API void rk_model_free(rk_model* m);
RK_API size_t rk_model_classes(const rk_model* m);
RK_API size_t rk_model_dims(const rk_model* m);

/* score(i,k) = w_k . x_i + b_k */
RK_API rk_status rk_predict_scores(const rk_model* m, const rk_matrix* x,
                                   rk_matrix** out);

/* Squared-hinge objective value and exact gradient for one class.
 * grad must hold dims+1 values (weight gradient, then bias gradient). */
RK_API rk_status rk_loss_and_gradient(const rk_model* m, const rk_matrix* x,
                                      const rk_labels* y, size_t class_index,
                                      double* loss, double* grad);

/* Weights matrix at `path` (binary format) plus JSON sidecar at `path`.json
 * holding biases and hyperparameters. */
RK_API rk_status rk_model_save(const rk_model* m, const char* path);
RK_API rk_status rk_model_load(const char* path, rk_model** out);

/* ------------------------------------------------------------------ */
/* Evaluation                                                         */
/* ------------------------------------------------------------------ */

/* Average precision of a ranked list. Sorting is by score descending with
 * ties broken by ascending index. Errors if no item is relevant. */
RK_API rk_status rk_average_precision(const double* scores,
                                      const uint8_t* relevant, size_t n,
                                      double* out);

/* Unweighted mean of per-class AP; class k's relevance is (label == k).
 * Every class in [0, cols) must have at least one positive. */
RK_API rk_status rk_mean_average_precision(const rk_matrix* scores,
                                           const rk_labels* y, double* out);

/* JSON report {"per_class_ap":[...],"map":...}. */
RK_API rk_status rk_evaluate_report_json(const rk_matrix* scores,
                                         const rk_labels* y, char** out_json);

/* Population standard deviation per column. out must hold cols values. */
RK_API rk_status rk_column_std_profile(const rk_matrix* m, double* out);

/* Histogram of all values. has_range=0 uses the data min/max. JSON fields:
 * bin_edges, counts, total. */
RK_API rk_status rk_value_histogram_json(const rk_matrix* m, size_t bins,
                                         int has_range, double lo, double hi,
                                         char** out_json);

/* Cosine-similarity histograms for one class: positive-positive pairs and
 * positive-negative pairs, plus the number of zero-norm rows excluded. */
RK_API rk_status rk_cosine_stats_json(const rk_matrix* m, const rk_labels* y,
                                      size_t class_index, size_t bins,
                                      char** out_json);

/* Full diagnostics report: value histogram, column std profile and, when
 * labels are given, cosine stats per eligible class (or one class if
 * class_index >= 0). */
RK_API rk_status rk_stats_report_json(const rk_matrix* m, const rk_labels* y,
                                      int64_t class_index, size_t bins,
                                      char** out_json);

/* Writes the same diagnostics as CSV files under dir (value_histogram.csv,
 * std_profile.csv, cosine_class<k>_{pos_pos,pos_neg}.csv). */
RK_API rk_status rk_stats_report_csv(const rk_matrix* m, const rk_labels* y,
                                     int64_t class_index, size_t bins,
                                     const char* dir);

/* ------------------------------------------------------------------ */
/* Synthetic data                                                     */
/* ------------------------------------------------------------------ */

/* Sparse, bursty, class-structured generator. Deterministic in seed. */
RK_API rk_status rk_generate_sparse_bursty(size_t n_per_class, size_t classes,
                                           size_t dims, double p_sparse,
                                           size_t burst_dims,
                                           double burst_scale,
                                           double signal_strength,
                                           double noise_sigma, uint64_t seed,
                                           rk_matrix** features,
                                           rk_labels** labels);

/* Stratified deterministic split; every class keeps at least one sample on
 * each side. */
RK_API rk_status rk_benchmark_split(const rk_matrix* features,
                                    const rk_labels* labels,
                                    double train_fraction, uint64_t seed,
                                    rk_matrix** train_x, rk_labels** train_y,
                                    rk_matrix** test_x, rk_labels** test_y);

/* ------------------------------------------------------------------ */
/* Experiment runner                                                  */
/* ------------------------------------------------------------------ */

/* Validates a JSON run configuration (sections: seed, synth, split,
 * classifier, mir, rank; unknown keys rejected) and returns it with every
 * default filled in. */
RK_API rk_status rk_run_config_normalize(const char* config_json,
                                         char** out_json);

/* Runs the full synthetic comparison (normalization pipelines with and
 * without re-ranking, plus the approximate-ranking subset-size sweep) from
 * a JSON run configuration and returns the report as JSON. */
RK_API rk_status rk_repro_run(const char* config_json, char** report_json);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* RANKKIT_H */
