// C ABI wrapper over the core library. Every entry point follows the same
// shape: check handles, run the core call, map exceptions to status codes,
// and keep the message in a thread-local slot for rk_last_error().

#include "rankkit.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "classify/linear.hpp"
#include "core/error.hpp"
#include "core/io.hpp"
#include "core/matrix.hpp"
#include "core/parallel.hpp"
#include "evaluate/diagnostics.hpp"
#include "evaluate/metrics.hpp"
#include "experiment/repro.hpp"
#include "normalize/normalize.hpp"
#include "normalize/pipeline.hpp"
#include "rerank/mir.hpp"
#include "synth/generator.hpp"

struct rk_matrix {
    rankkit::Matrix m;
};
struct rk_labels {
    rankkit::Labels v;
};
struct rk_rank_ref {
    rankkit::RankReference ref;
};
struct rk_pipeline {
    rankkit::Pipeline p;
};
struct rk_model {
    rankkit::LinearModel m;
};

namespace {

thread_local std::string t_last_error = "no error";

template <typename Fn>
rk_status guarded(Fn&& fn) noexcept {
    try {
        fn();
        return RK_OK;
    } catch (const rankkit::error& e) {
        t_last_error = e.what();
        return static_cast<rk_status>(static_cast<int>(e.code()));
    } catch (const std::bad_alloc&) {
        t_last_error = "out of memory";
        return RK_ERROR_INTERNAL;
    } catch (const std::exception& e) {
        t_last_error = e.what();
        return RK_ERROR_INTERNAL;
    } catch (...) {
        t_last_error = "unknown error";
        return RK_ERROR_INTERNAL;
    }
}

rk_status fail(rk_status code, const char* message) noexcept {
    t_last_error = message;
    return code;
}

// Every handle and out-parameter must be checked before use; a null is a
// caller bug reported as a status, never a crash.
#define REQUIRE(cond, message)                                  \
    do {                                                        \
        if (!(cond)) return fail(RK_ERROR_INVALID_ARGUMENT, message); \
    } while (0)

char* copy_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

} // namespace

extern "C" {

const char* rk_version(void) { return "0.1.0"; }

const char* rk_last_error(void) { return t_last_error.c_str(); }

void rk_set_threads(int n) { rankkit::set_threads(n); }

int rk_threads(void) { return rankkit::threads(); }

void rk_str_free(char* s) { std::free(s); }

/* ------------------------------------------------------------------ */
/* Matrices                                                           */
/* ------------------------------------------------------------------ */

rk_status rk_matrix_create(size_t rows, size_t cols, const double* data,
                           rk_matrix** out) {
    REQUIRE(out, "null output handle");
    REQUIRE(rows > 0 && cols > 0,
            "matrix needs at least one row and one column");
    REQUIRE(cols <= SIZE_MAX / rows, "matrix dimensions overflow");
    return guarded([&] {
        rankkit::Matrix m(rows, cols);
        if (data) std::memcpy(m.data(), data, rows * cols * sizeof(double));
        *out = new rk_matrix{std::move(m)};
    });
}

void rk_matrix_free(rk_matrix* m) { delete m; }

size_t rk_matrix_rows(const rk_matrix* m) { return m ? m->m.rows() : 0; }

size_t rk_matrix_cols(const rk_matrix* m) { return m ? m->m.cols() : 0; }

const double* rk_matrix_data(const rk_matrix* m) {
    return m ? m->m.data() : nullptr;
}

rk_status rk_matrix_validate(const rk_matrix* m) {
    REQUIRE(m, "null matrix handle");
    return guarded([&] { rankkit::validate_matrix(m->m); });
}

rk_status rk_matrix_read(const char* path, const char* format, int csv_header,
                         rk_matrix** out) {
    REQUIRE(path && format && out, "null argument");
    return guarded([&] {
        rankkit::Matrix m =
            rankkit::io::read_matrix(path, format, csv_header != 0);
        rankkit::validate_matrix(m, path);
        *out = new rk_matrix{std::move(m)};
    });
}

rk_status rk_matrix_write(const rk_matrix* m, const char* path,
                          const char* format) {
    REQUIRE(m && path && format, "null argument");
    return guarded([&] { rankkit::io::write_matrix(m->m, path, format); });
}

/* ------------------------------------------------------------------ */
/* Labels                                                             */
/* ------------------------------------------------------------------ */

rk_status rk_labels_create(size_t count, const int64_t* labels,
                           rk_labels** out) {
    REQUIRE(out, "null output handle");
    REQUIRE(count > 0, "labels must not be empty");
    REQUIRE(labels, "null labels array");
    return guarded([&] {
        *out = new rk_labels{rankkit::Labels(labels, labels + count)};
    });
}

void rk_labels_free(rk_labels* l) { delete l; }

size_t rk_labels_count(const rk_labels* l) { return l ? l->v.size() : 0; }

const int64_t* rk_labels_data(const rk_labels* l) {
    return l ? l->v.data() : nullptr;
}

rk_status rk_labels_read(const char* path, rk_labels** out) {
    REQUIRE(path && out, "null argument");
    return guarded([&] {
        *out = new rk_labels{rankkit::io::read_labels(path)};
    });
}

rk_status rk_labels_write(const rk_labels* l, const char* path) {
    REQUIRE(l && path, "null argument");
    return guarded([&] { rankkit::io::write_labels(l->v, path); });
}

/* ------------------------------------------------------------------ */
/* Normalization                                                      */
/* ------------------------------------------------------------------ */

rk_status rk_l2_normalize(const rk_matrix* m, rk_matrix** out) {
    REQUIRE(m && out, "null argument");
    return guarded([&] {
        *out = new rk_matrix{rankkit::l2_normalize(m->m)};
    });
}

rk_status rk_power_normalize(const rk_matrix* m, double alpha,
                             rk_matrix** out) {
    REQUIRE(m && out, "null argument");
    return guarded([&] {
        *out = new rk_matrix{rankkit::power_normalize(m->m, alpha)};
    });
}

rk_status rk_rank_normalize_exact(const rk_matrix* m, const char* tie,
                                  rk_matrix** out) {
    REQUIRE(m && tie && out, "null argument");
    return guarded([&] {
        *out = new rk_matrix{
            rankkit::rank_normalize_exact(m->m, rankkit::parse_tie_policy(tie))};
    });
}

rk_status rk_fit_rank_reference(const rk_matrix* m, size_t subset_size,
                                uint64_t seed, rk_rank_ref** out) {
    REQUIRE(m && out, "null argument");
    return guarded([&] {
        *out = new rk_rank_ref{
            rankkit::fit_rank_reference(m->m, subset_size, seed)};
    });
}

void rk_rank_ref_free(rk_rank_ref* r) { delete r; }

size_t rk_rank_ref_subset_size(const rk_rank_ref* r) {
    return r ? r->ref.subset_size() : 0;
}

size_t rk_rank_ref_dims(const rk_rank_ref* r) {
    return r ? r->ref.dims() : 0;
}

rk_status rk_rank_ref_save(const rk_rank_ref* r, const char* path) {
    REQUIRE(r && path, "null argument");
    return guarded([&] { rankkit::save_rank_reference(r->ref, path); });
}

rk_status rk_rank_ref_load(const char* path, rk_rank_ref** out) {
    REQUIRE(path && out, "null argument");
    return guarded([&] {
        *out = new rk_rank_ref{rankkit::load_rank_reference(path)};
    });
}

rk_status rk_rank_normalize_approx(const rk_matrix* m, const rk_rank_ref* ref,
                                   rk_matrix** out) {
    REQUIRE(m && ref && out, "null argument");
    return guarded([&] {
        *out = new rk_matrix{rankkit::rank_normalize_approx(m->m, ref->ref)};
    });
}

rk_status rk_within_group_rank_normalize(const rk_matrix* const* groups,
                                         size_t n_groups, const char* tie,
                                         rk_matrix** outs) {
    REQUIRE(groups && tie && outs, "null argument");
    REQUIRE(n_groups > 0, "no groups given");
    return guarded([&] {
        std::vector<const rankkit::Matrix*> views;
        views.reserve(n_groups);
        for (size_t g = 0; g < n_groups; ++g) {
            if (!groups[g])
                rankkit::throw_error(rankkit::errc::invalid_argument,
                                     "null group matrix");
            views.push_back(&groups[g]->m);
        }
        auto results = rankkit::within_group_rank_normalize(
            views, rankkit::parse_tie_policy(tie));
        for (size_t g = 0; g < n_groups; ++g)
            outs[g] = new rk_matrix{std::move(results[g])};
    });
}

/* ------------------------------------------------------------------ */
/* Pipelines                                                          */
/* ------------------------------------------------------------------ */

rk_status rk_pipeline_parse(const char* json, rk_pipeline** out) {
    REQUIRE(json && out, "null argument");
    return guarded([&] {
        *out = new rk_pipeline{rankkit::parse_pipeline(json)};
    });
}

void rk_pipeline_free(rk_pipeline* p) { delete p; }

rk_status rk_pipeline_to_json(const rk_pipeline* p, char** out_json) {
    REQUIRE(p && out_json, "null argument");
    return guarded([&] {
        *out_json = copy_string(rankkit::pipeline_to_json(p->p));
    });
}

rk_status rk_pipeline_apply(const rk_matrix* m, const rk_pipeline* p,
                            const rk_rank_ref* ref, rk_matrix** out) {
    return rk_pipeline_apply_fit(m, p, ref, out, nullptr);
}

rk_status rk_pipeline_apply_fit(const rk_matrix* m, const rk_pipeline* p,
                                const rk_rank_ref* ref, rk_matrix** out,
                                rk_rank_ref** fitted_out) {
    REQUIRE(m && p && out, "null argument");
    return guarded([&] {
        std::optional<rankkit::RankReference> fitted;
        rankkit::Matrix result = rankkit::apply_pipeline(
            m->m, p->p, ref ? &ref->ref : nullptr,
            fitted_out ? &fitted : nullptr);
        *out = new rk_matrix{std::move(result)};
        if (fitted_out)
            *fitted_out =
                fitted ? new rk_rank_ref{std::move(*fitted)} : nullptr;
    });
}

/* ------------------------------------------------------------------ */
/* Score re-ranking                                                   */
/* ------------------------------------------------------------------ */

rk_status rk_mir_rerank(const rk_matrix* scores, double eta, double beta,
                        size_t iters, rk_matrix** out) {
    REQUIRE(scores && out, "null argument");
    return guarded([&] {
        *out = new rk_matrix{
            rankkit::mir_rerank(scores->m, {eta, beta, iters})};
    });
}

rk_status rk_mir_rerank_traced(const rk_matrix* scores, double eta,
                               double beta, size_t iters, rk_matrix** out,
                               char** trace_json) {
    REQUIRE(scores && out && trace_json, "null argument");
    return guarded([&] {
        rankkit::MirTrace trace;
        rankkit::Matrix result =
            rankkit::mir_rerank(scores->m, {eta, beta, iters}, &trace);
        *out = new rk_matrix{std::move(result)};
        *trace_json = copy_string(rankkit::mir_trace_to_json(trace));
    });
}

rk_status rk_minmax_normalize_scores(const rk_matrix* scores,
                                     const char* mode, rk_matrix** out) {
    REQUIRE(scores && mode && out, "null argument");
    return guarded([&] {
        *out = new rk_matrix{rankkit::minmax_normalize_scores(
            scores->m, rankkit::parse_minmax_mode(mode))};
    });
}

rk_status rk_rolloff_profile(const rk_matrix* scores, size_t row,
                             double* out) {
    REQUIRE(scores && out, "null argument");
    return guarded([&] {
        const auto profile = rankkit::rolloff_profile(scores->m, row);
        std::memcpy(out, profile.data(), profile.size() * sizeof(double));
    });
}

/* ------------------------------------------------------------------ */
/* Classification                                                     */
/* ------------------------------------------------------------------ */

rk_status rk_train_linear_ovr(const rk_matrix* x, const rk_labels* y,
                              double c, size_t epochs, double learning_rate,
                              double init_noise, uint64_t seed,
                              rk_model** out) {
    REQUIRE(x && y && out, "null argument");
    return guarded([&] {
        rankkit::TrainParams params{c, epochs, learning_rate, init_noise};
        *out = new rk_model{
            rankkit::train_ovr_linear(x->m, y->v, params, seed)};
    });
}

void rk_model_free(rk_model* m) { delete m; }

size_t rk_model_classes(const rk_model* m) { return m ? m->m.classes() : 0; }

size_t rk_model_dims(const rk_model* m) { return m ? m->m.dims() : 0; }

rk_status rk_predict_scores(const rk_model* m, const rk_matrix* x,
                            rk_matrix** out) {
    REQUIRE(m && x && out, "null argument");
    return guarded([&] {
        *out = new rk_matrix{rankkit::predict_scores(m->m, x->m)};
    });
}

rk_status rk_loss_and_gradient(const rk_model* m, const rk_matrix* x,
                               const rk_labels* y, size_t class_index,
                               double* loss, double* grad) {
    REQUIRE(m && x && y && loss && grad, "null argument");
    return guarded([&] {
        auto [value, gradient] =
            rankkit::loss_and_gradient(m->m, x->m, y->v, class_index);
        *loss = value;
        std::memcpy(grad, gradient.data(),
                    gradient.size() * sizeof(double));
    });
}

rk_status rk_model_save(const rk_model* m, const char* path) {
    REQUIRE(m && path, "null argument");
    return guarded([&] { rankkit::save_model(m->m, path); });
}

rk_status rk_model_load(const char* path, rk_model** out) {
    REQUIRE(path && out, "null argument");
    return guarded([&] {
        *out = new rk_model{rankkit::load_model(path)};
    });
}

/* ------------------------------------------------------------------ */
/* Evaluation                                                         */
/* ------------------------------------------------------------------ */

rk_status rk_average_precision(const double* scores, const uint8_t* relevant,
                               size_t n, double* out) {
    REQUIRE(scores && relevant && out, "null argument");
    return guarded([&] {
        *out = rankkit::average_precision(scores, relevant, n);
    });
}

rk_status rk_mean_average_precision(const rk_matrix* scores,
                                    const rk_labels* y, double* out) {
    REQUIRE(scores && y && out, "null argument");
    return guarded([&] {
        *out = rankkit::mean_average_precision(scores->m, y->v);
    });
}

rk_status rk_evaluate_report_json(const rk_matrix* scores, const rk_labels* y,
                                  char** out_json) {
    REQUIRE(scores && y && out_json, "null argument");
    return guarded([&] {
        const auto ap = rankkit::per_class_average_precision(scores->m, y->v);
        double sum = 0.0;
        for (double v : ap) sum += v;
        nlohmann::json doc{
            {"per_class_ap", ap},
            {"map", sum / static_cast<double>(ap.size())},
        };
        *out_json = copy_string(doc.dump(2));
    });
}

rk_status rk_column_std_profile(const rk_matrix* m, double* out) {
    REQUIRE(m && out, "null argument");
    return guarded([&] {
        const auto stds = rankkit::column_std_profile(m->m);
        std::memcpy(out, stds.data(), stds.size() * sizeof(double));
    });
}

rk_status rk_value_histogram_json(const rk_matrix* m, size_t bins,
                                  int has_range, double lo, double hi,
                                  char** out_json) {
    REQUIRE(m && out_json, "null argument");
    return guarded([&] {
        std::optional<std::pair<double, double>> range;
        if (has_range) range = {lo, hi};
        const auto hist = rankkit::value_histogram(m->m, bins, range);
        *out_json = copy_string(rankkit::histogram_to_json(hist).dump(2));
    });
}

rk_status rk_cosine_stats_json(const rk_matrix* m, const rk_labels* y,
                               size_t class_index, size_t bins,
                               char** out_json) {
    REQUIRE(m && y && out_json, "null argument");
    return guarded([&] {
        const auto stats =
            rankkit::cosine_similarity_stats(m->m, y->v, class_index, bins);
        nlohmann::json doc{
            {"class", class_index},
            {"pos_pos", rankkit::histogram_to_json(stats.pos_pos)},
            {"pos_neg", rankkit::histogram_to_json(stats.pos_neg)},
            {"zero_norm_excluded", stats.zero_norm_excluded},
        };
        *out_json = copy_string(doc.dump(2));
    });
}

rk_status rk_stats_report_json(const rk_matrix* m, const rk_labels* y,
                               int64_t class_index, size_t bins,
                               char** out_json) {
    REQUIRE(m && out_json, "null argument");
    return guarded([&] {
        const auto doc = rankkit::stats_report(m->m, y ? &y->v : nullptr,
                                               class_index, bins);
        *out_json = copy_string(doc.dump(2));
    });
}

rk_status rk_stats_report_csv(const rk_matrix* m, const rk_labels* y,
                              int64_t class_index, size_t bins,
                              const char* dir) {
    REQUIRE(m && dir, "null argument");
    return guarded([&] {
        rankkit::write_stats_csv(m->m, y ? &y->v : nullptr, class_index, bins,
                                 dir);
    });
}

/* ------------------------------------------------------------------ */
/* Synthetic data                                                     */
/* ------------------------------------------------------------------ */

rk_status rk_generate_sparse_bursty(size_t n_per_class, size_t classes,
                                    size_t dims, double p_sparse,
                                    size_t burst_dims, double burst_scale,
                                    double signal_strength, double noise_sigma,
                                    uint64_t seed, rk_matrix** features,
                                    rk_labels** labels) {
    REQUIRE(features && labels, "null output handle");
    return guarded([&] {
        rankkit::SynthParams params;
        params.n_per_class = n_per_class;
        params.classes = classes;
        params.dims = dims;
        params.p_sparse = p_sparse;
        params.burst_dims = burst_dims;
        params.burst_scale = burst_scale;
        params.signal_strength = signal_strength;
        params.noise_sigma = noise_sigma;
        params.seed = seed;
        auto [x, y] = rankkit::generate_sparse_bursty(params);
        *features = new rk_matrix{std::move(x)};
        *labels = new rk_labels{std::move(y)};
    });
}

rk_status rk_benchmark_split(const rk_matrix* features,
                             const rk_labels* labels, double train_fraction,
                             uint64_t seed, rk_matrix** train_x,
                             rk_labels** train_y, rk_matrix** test_x,
                             rk_labels** test_y) {
    REQUIRE(features && labels, "null argument");
    REQUIRE(train_x && train_y && test_x && test_y, "null output handle");
    return guarded([&] {
        auto split = rankkit::benchmark_split(features->m, labels->v,
                                              train_fraction, seed);
        *train_x = new rk_matrix{std::move(split.train_x)};
        *train_y = new rk_labels{std::move(split.train_y)};
        *test_x = new rk_matrix{std::move(split.test_x)};
        *test_y = new rk_labels{std::move(split.test_y)};
    });
}

/* ------------------------------------------------------------------ */
/* Experiment runner                                                  */
/* ------------------------------------------------------------------ */

rk_status rk_run_config_normalize(const char* config_json, char** out_json) {
    REQUIRE(config_json && out_json, "null argument");
    return guarded([&] {
        const auto cfg = rankkit::parse_run_config(config_json);
        *out_json = copy_string(rankkit::run_config_to_json(cfg).dump(2));
    });
}

rk_status rk_repro_run(const char* config_json, char** report_json) {
    REQUIRE(config_json && report_json, "null argument");
    return guarded([&] {
        const auto cfg = rankkit::parse_run_config(config_json);
        *report_json = copy_string(rankkit::run_repro(cfg).dump(2));
    });
}

} // extern "C"
