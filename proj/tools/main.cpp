// rankkit command line tool. Talks to the library exclusively through the
// public C API; every subcommand is deterministic given its arguments, and
// failures exit nonzero with a machine-readable JSON object on stderr.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rankkit.h"

namespace {

using nlohmann::json;

const char* status_name(int code) {
    switch (code) {
        case RK_OK: return "ok";
        case RK_ERROR_INVALID_ARGUMENT: return "invalid_argument";
        case RK_ERROR_DIMENSION_MISMATCH: return "dimension_mismatch";
        case RK_ERROR_NOT_FINITE: return "not_finite";
        case RK_ERROR_IO: return "io";
        case RK_ERROR_FORMAT: return "format";
        case RK_ERROR_DOMAIN: return "domain";
        case RK_ERROR_DIVERGED: return "diverged";
        default: return "internal";
    }
}

struct CommandError : std::runtime_error {
    CommandError(int code_, const std::string& message)
        : std::runtime_error(message), code(code_) {}
    int code;
};

void check(rk_status status) {
    if (status != RK_OK) throw CommandError(status, rk_last_error());
}

[[noreturn]] void usage_error(const std::string& message) {
    throw CommandError(RK_ERROR_INVALID_ARGUMENT, message);
}

// RAII over the C handles so error paths cannot leak.
using matrix_ptr = std::unique_ptr<rk_matrix, void (*)(rk_matrix*)>;
using labels_ptr = std::unique_ptr<rk_labels, void (*)(rk_labels*)>;
using ref_ptr = std::unique_ptr<rk_rank_ref, void (*)(rk_rank_ref*)>;
using pipeline_ptr = std::unique_ptr<rk_pipeline, void (*)(rk_pipeline*)>;
using model_ptr = std::unique_ptr<rk_model, void (*)(rk_model*)>;

struct CString {
    char* p = nullptr;
    ~CString() { rk_str_free(p); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CommandError(RK_ERROR_IO, path + ": cannot open");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CommandError(RK_ERROR_IO, path + ": cannot open");
    out << content;
    out.flush();
    if (!out) throw CommandError(RK_ERROR_IO, path + ": write failed");
}

matrix_ptr read_matrix(const std::string& path, const std::string& format,
                       bool header) {
    rk_matrix* m = nullptr;
    check(rk_matrix_read(path.c_str(), format.c_str(), header ? 1 : 0, &m));
    return {m, rk_matrix_free};
}

labels_ptr read_labels(const std::string& path) {
    rk_labels* l = nullptr;
    check(rk_labels_read(path.c_str(), &l));
    return {l, rk_labels_free};
}

// A valid normalized config, with defaults filled in, for the given file
// (or for an empty document when no file was passed).
json load_config(const std::optional<std::string>& path) {
    const std::string text = path ? slurp(*path) : "{}";
    CString normalized;
    check(rk_run_config_normalize(text.c_str(), &normalized.p));
    return json::parse(normalized.p);
}

void emit(const json& doc) { std::cout << doc.dump(2) << "\n"; }

// Option values resolve as: explicit flag > config file value > default
// (defaults come from the normalized config, so they live in one place).
template <typename T>
T resolve(const CLI::App* cmd, const std::string& flag, const T& flag_value,
          const json& section, const char* key) {
    if (cmd->count(flag) > 0) return flag_value;
    return section.at(key).get<T>();
}

struct CommonIn {
    std::string format = "binary";
    bool header = false;
};

void add_input_format(CLI::App* cmd, CommonIn& in) {
    cmd->add_option("--in-format", in.format, "input matrix format")
        ->check(CLI::IsMember({"binary", "csv"}));
    cmd->add_flag("--header", in.header, "skip the first line of csv input");
}

/* ----------------------------- synth ------------------------------ */

struct SynthArgs {
    std::optional<std::string> config;
    std::uint64_t seed = 0;
    std::uint64_t n_per_class = 0, classes = 0, dims = 0, burst_dims = 0;
    double p_sparse = 0, burst_scale = 0, signal_strength = 0, noise_sigma = 0;
    std::string features_out, labels_out, format = "binary";
};

void run_synth(const CLI::App* cmd, const SynthArgs& a) {
    const json cfg = load_config(a.config);
    const json& synth = cfg.at("synth");

    std::optional<std::uint64_t> seed;
    if (cmd->count("--seed"))
        seed = a.seed;
    else if (cfg.contains("seed"))
        seed = cfg.at("seed").get<std::uint64_t>();
    if (!seed)
        usage_error("a seed is required: pass --seed or put \"seed\" in the "
                    "config file");

    rk_matrix* features = nullptr;
    rk_labels* labels = nullptr;
    check(rk_generate_sparse_bursty(
        resolve(cmd, "--n-per-class", a.n_per_class, synth, "n_per_class"),
        resolve(cmd, "--classes", a.classes, synth, "classes"),
        resolve(cmd, "--dims", a.dims, synth, "dims"),
        resolve(cmd, "--p-sparse", a.p_sparse, synth, "p_sparse"),
        resolve(cmd, "--burst-dims", a.burst_dims, synth, "burst_dims"),
        resolve(cmd, "--burst-scale", a.burst_scale, synth, "burst_scale"),
        resolve(cmd, "--signal-strength", a.signal_strength, synth,
                "signal_strength"),
        resolve(cmd, "--noise-sigma", a.noise_sigma, synth, "noise_sigma"),
        *seed, &features, &labels));
    matrix_ptr x(features, rk_matrix_free);
    labels_ptr y(labels, rk_labels_free);

    check(rk_matrix_write(x.get(), a.features_out.c_str(), a.format.c_str()));
    check(rk_labels_write(y.get(), a.labels_out.c_str()));
    emit(json{{"features", a.features_out},
              {"labels", a.labels_out},
              {"rows", rk_matrix_rows(x.get())},
              {"cols", rk_matrix_cols(x.get())}});
}

/* --------------------------- normalize ---------------------------- */

struct NormalizeArgs {
    std::string in;
    CommonIn in_fmt;
    std::string pipeline;
    std::optional<std::string> ref;
    std::optional<std::string> save_ref;
    std::string out, out_format = "binary";
};

void run_normalize(const NormalizeArgs& a) {
    // --pipeline takes inline JSON or a path to a JSON file.
    const std::string pipeline_text =
        !a.pipeline.empty() && a.pipeline.front() == '{' ? a.pipeline
                                                         : slurp(a.pipeline);
    rk_pipeline* p = nullptr;
    check(rk_pipeline_parse(pipeline_text.c_str(), &p));
    pipeline_ptr pipeline(p, rk_pipeline_free);

    ref_ptr ref(nullptr, rk_rank_ref_free);
    if (a.ref) {
        rk_rank_ref* r = nullptr;
        check(rk_rank_ref_load(a.ref->c_str(), &r));
        ref.reset(r);
    }

    const matrix_ptr in = read_matrix(a.in, a.in_fmt.format, a.in_fmt.header);
    rk_matrix* out = nullptr;
    rk_rank_ref* fitted = nullptr;
    check(rk_pipeline_apply_fit(in.get(), pipeline.get(), ref.get(), &out,
                                &fitted));
    matrix_ptr result(out, rk_matrix_free);
    ref_ptr fitted_ref(fitted, rk_rank_ref_free);

    check(rk_matrix_write(result.get(), a.out.c_str(), a.out_format.c_str()));
    json summary{{"out", a.out},
                 {"rows", rk_matrix_rows(result.get())},
                 {"cols", rk_matrix_cols(result.get())}};
    if (a.save_ref) {
        if (!fitted_ref)
            usage_error("--save-ref given but no pipeline step fitted a "
                        "reference from the input");
        check(rk_rank_ref_save(fitted_ref.get(), a.save_ref->c_str()));
        summary["saved_ref"] = *a.save_ref;
    }
    emit(summary);
}

/* ----------------------------- train ------------------------------ */

struct TrainArgs {
    std::optional<std::string> config;
    std::string features, labels;
    CommonIn in_fmt;
    double c = 0, learning_rate = 0, init_noise = 0;
    std::uint64_t epochs = 0, seed = 0;
    std::string model_out;
};

void run_train(const CLI::App* cmd, const TrainArgs& a) {
    const json cfg = load_config(a.config);
    const json& cls = cfg.at("classifier");

    const double init_noise =
        resolve(cmd, "--init-noise", a.init_noise, cls, "init_noise");
    std::optional<std::uint64_t> seed;
    if (cmd->count("--seed"))
        seed = a.seed;
    else if (cfg.contains("seed"))
        seed = cfg.at("seed").get<std::uint64_t>();
    if (init_noise > 0 && !seed)
        usage_error("--init-noise randomizes training: pass --seed or put "
                    "\"seed\" in the config file");

    const matrix_ptr x =
        read_matrix(a.features, a.in_fmt.format, a.in_fmt.header);
    const labels_ptr y = read_labels(a.labels);

    rk_model* model = nullptr;
    check(rk_train_linear_ovr(
        x.get(), y.get(), resolve(cmd, "--c", a.c, cls, "c"),
        resolve(cmd, "--epochs", a.epochs, cls, "epochs"),
        resolve(cmd, "--learning-rate", a.learning_rate, cls,
                "learning_rate"),
        init_noise, seed.value_or(0), &model));
    model_ptr m(model, rk_model_free);

    check(rk_model_save(m.get(), a.model_out.c_str()));
    emit(json{{"model", a.model_out},
              {"classes", rk_model_classes(m.get())},
              {"dims", rk_model_dims(m.get())}});
}

/* ---------------------------- predict ----------------------------- */

struct PredictArgs {
    std::string model, features;
    CommonIn in_fmt;
    std::string scores_out, out_format = "binary";
};

void run_predict(const PredictArgs& a) {
    rk_model* model = nullptr;
    check(rk_model_load(a.model.c_str(), &model));
    model_ptr m(model, rk_model_free);

    const matrix_ptr x =
        read_matrix(a.features, a.in_fmt.format, a.in_fmt.header);
    rk_matrix* scores = nullptr;
    check(rk_predict_scores(m.get(), x.get(), &scores));
    matrix_ptr s(scores, rk_matrix_free);

    check(rk_matrix_write(s.get(), a.scores_out.c_str(),
                          a.out_format.c_str()));
    emit(json{{"scores", a.scores_out},
              {"rows", rk_matrix_rows(s.get())},
              {"cols", rk_matrix_cols(s.get())}});
}

/* ----------------------------- rerank ----------------------------- */

struct RerankArgs {
    std::optional<std::string> config;
    std::string scores;
    CommonIn in_fmt;
    double eta = 0, beta = 0;
    std::uint64_t iters = 0;
    std::string out, out_format = "binary";
    std::optional<std::string> trace_out;
};

void run_rerank(const CLI::App* cmd, const RerankArgs& a) {
    const json cfg = load_config(a.config);
    const json& mir = cfg.at("mir");
    const double eta = resolve(cmd, "--eta", a.eta, mir, "eta");
    const double beta = resolve(cmd, "--beta", a.beta, mir, "beta");
    const std::uint64_t iters =
        resolve(cmd, "--iters", a.iters, mir, "iters");

    const matrix_ptr scores =
        read_matrix(a.scores, a.in_fmt.format, a.in_fmt.header);
    rk_matrix* out = nullptr;
    json summary{{"out", a.out}};
    if (a.trace_out) {
        CString trace;
        check(rk_mir_rerank_traced(scores.get(), eta, beta, iters, &out,
                                   &trace.p));
        matrix_ptr result(out, rk_matrix_free);
        spit(*a.trace_out, std::string(trace.p) + "\n");
        check(rk_matrix_write(result.get(), a.out.c_str(),
                              a.out_format.c_str()));
        summary["trace"] = *a.trace_out;
    } else {
        check(rk_mir_rerank(scores.get(), eta, beta, iters, &out));
        matrix_ptr result(out, rk_matrix_free);
        check(rk_matrix_write(result.get(), a.out.c_str(),
                              a.out_format.c_str()));
    }
    emit(summary);
}

/* ---------------------------- evaluate ---------------------------- */

struct EvaluateArgs {
    std::string scores, labels;
    CommonIn in_fmt;
    std::optional<std::string> report_out;
};

void run_evaluate(const EvaluateArgs& a) {
    const matrix_ptr scores =
        read_matrix(a.scores, a.in_fmt.format, a.in_fmt.header);
    const labels_ptr y = read_labels(a.labels);
    CString report;
    check(rk_evaluate_report_json(scores.get(), y.get(), &report.p));
    if (a.report_out) spit(*a.report_out, std::string(report.p) + "\n");
    std::cout << report.p << "\n";
}

/* ------------------------------ stats ----------------------------- */

struct StatsArgs {
    std::string features;
    std::optional<std::string> labels;
    CommonIn in_fmt;
    std::int64_t class_index = -1;
    std::uint64_t bins = 50;
    std::optional<std::string> json_out;
    std::optional<std::string> csv_dir;
};

void run_stats(const StatsArgs& a) {
    const matrix_ptr x =
        read_matrix(a.features, a.in_fmt.format, a.in_fmt.header);
    labels_ptr y(nullptr, rk_labels_free);
    if (a.labels) y = read_labels(*a.labels);

    CString report;
    check(rk_stats_report_json(x.get(), y.get(), a.class_index, a.bins,
                               &report.p));
    if (a.json_out)
        spit(*a.json_out, std::string(report.p) + "\n");
    else
        std::cout << report.p << "\n";
    if (a.csv_dir)
        check(rk_stats_report_csv(x.get(), y.get(), a.class_index, a.bins,
                                  a.csv_dir->c_str()));
}

/* ------------------------------ repro ----------------------------- */

struct ReproArgs {
    std::string config;
    std::uint64_t seed = 0;
    std::string out = "repro_report.json";
};

void run_repro(const CLI::App* cmd, const ReproArgs& a) {
    json doc;
    try {
        doc = json::parse(slurp(a.config));
    } catch (const json::exception& e) {
        throw CommandError(RK_ERROR_FORMAT,
                           a.config + ": invalid JSON (" + e.what() + ")");
    }
    if (cmd->count("--seed")) doc["seed"] = a.seed;

    CString report;
    check(rk_repro_run(doc.dump().c_str(), &report.p));
    spit(a.out, std::string(report.p) + "\n");
    std::cout << report.p << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rank-based feature normalization and score re-ranking"};
    app.require_subcommand(1);
    int threads = 1;
    app.add_option("--threads", threads,
                   "worker threads (never changes results)");

    SynthArgs synth_args;
    auto* synth = app.add_subcommand(
        "synth", "generate sparse bursty class-structured features");
    synth->fallthrough();
    synth->add_option("--config", synth_args.config,
                      "run config JSON supplying defaults");
    synth->add_option("--seed", synth_args.seed, "generator seed");
    synth->add_option("--n-per-class", synth_args.n_per_class);
    synth->add_option("--classes", synth_args.classes);
    synth->add_option("--dims", synth_args.dims);
    synth->add_option("--p-sparse", synth_args.p_sparse);
    synth->add_option("--burst-dims", synth_args.burst_dims);
    synth->add_option("--burst-scale", synth_args.burst_scale);
    synth->add_option("--signal-strength", synth_args.signal_strength);
    synth->add_option("--noise-sigma", synth_args.noise_sigma);
    synth->add_option("--features-out", synth_args.features_out)->required();
    synth->add_option("--labels-out", synth_args.labels_out)->required();
    synth->add_option("--format", synth_args.format)
        ->check(CLI::IsMember({"binary", "csv"}));
    synth->callback([&] {
        rk_set_threads(threads);
        run_synth(synth, synth_args);
    });

    NormalizeArgs normalize_args;
    auto* normalize =
        app.add_subcommand("normalize", "apply a normalization pipeline");
    normalize->fallthrough();
    normalize->add_option("--in", normalize_args.in)->required();
    add_input_format(normalize, normalize_args.in_fmt);
    normalize
        ->add_option("--pipeline", normalize_args.pipeline,
                     "pipeline JSON (inline or a file path)")
        ->required();
    normalize->add_option("--ref", normalize_args.ref,
                          "rank reference to use for rank_approx steps");
    normalize->add_option("--save-ref", normalize_args.save_ref,
                          "save the reference fitted by the pipeline here");
    normalize->add_option("--out", normalize_args.out)->required();
    normalize->add_option("--out-format", normalize_args.out_format)
        ->check(CLI::IsMember({"binary", "csv"}));
    normalize->callback([&] {
        rk_set_threads(threads);
        run_normalize(normalize_args);
    });

    TrainArgs train_args;
    auto* train =
        app.add_subcommand("train", "train the one-vs-rest linear classifier");
    train->fallthrough();
    train->add_option("--config", train_args.config);
    train->add_option("--features", train_args.features)->required();
    train->add_option("--labels", train_args.labels)->required();
    add_input_format(train, train_args.in_fmt);
    train->add_option("--c", train_args.c);
    train->add_option("--epochs", train_args.epochs);
    train->add_option("--learning-rate", train_args.learning_rate);
    train->add_option("--init-noise", train_args.init_noise);
    train->add_option("--seed", train_args.seed);
    train->add_option("--model-out", train_args.model_out)->required();
    train->callback([&] {
        rk_set_threads(threads);
        run_train(train, train_args);
    });

    PredictArgs predict_args;
    auto* predict = app.add_subcommand("predict", "score samples with a model");
    predict->fallthrough();
    predict->add_option("--model", predict_args.model)->required();
    predict->add_option("--features", predict_args.features)->required();
    add_input_format(predict, predict_args.in_fmt);
    predict->add_option("--scores-out", predict_args.scores_out)->required();
    predict->add_option("--out-format", predict_args.out_format)
        ->check(CLI::IsMember({"binary", "csv"}));
    predict->callback([&] {
        rk_set_threads(threads);
        run_predict(predict_args);
    });

    RerankArgs rerank_args;
    auto* rerank =
        app.add_subcommand("rerank", "iteratively re-rank a score matrix");
    rerank->fallthrough();
    rerank->add_option("--config", rerank_args.config);
    rerank->add_option("--scores", rerank_args.scores)->required();
    add_input_format(rerank, rerank_args.in_fmt);
    rerank->add_option("--eta", rerank_args.eta);
    rerank->add_option("--beta", rerank_args.beta);
    rerank->add_option("--iters", rerank_args.iters);
    rerank->add_option("--out", rerank_args.out)->required();
    rerank->add_option("--out-format", rerank_args.out_format)
        ->check(CLI::IsMember({"binary", "csv"}));
    rerank->add_option("--trace-out", rerank_args.trace_out,
                       "write per-iteration trace JSON here");
    rerank->callback([&] {
        rk_set_threads(threads);
        run_rerank(rerank, rerank_args);
    });

    EvaluateArgs evaluate_args;
    auto* evaluate =
        app.add_subcommand("evaluate", "per-class AP and mAP of scores");
    evaluate->fallthrough();
    evaluate->add_option("--scores", evaluate_args.scores)->required();
    evaluate->add_option("--labels", evaluate_args.labels)->required();
    add_input_format(evaluate, evaluate_args.in_fmt);
    evaluate->add_option("--report-out", evaluate_args.report_out);
    evaluate->callback([&] {
        rk_set_threads(threads);
        run_evaluate(evaluate_args);
    });

    StatsArgs stats_args;
    auto* stats = app.add_subcommand(
        "stats", "value/std/cosine distribution diagnostics");
    stats->fallthrough();
    stats->add_option("--features", stats_args.features)->required();
    stats->add_option("--labels", stats_args.labels);
    add_input_format(stats, stats_args.in_fmt);
    stats->add_option("--class", stats_args.class_index,
                      "cosine stats class (-1 = all eligible)");
    stats->add_option("--bins", stats_args.bins);
    stats->add_option("--json-out", stats_args.json_out);
    stats->add_option("--csv-dir", stats_args.csv_dir);
    stats->callback([&] {
        rk_set_threads(threads);
        run_stats(stats_args);
    });

    ReproArgs repro_args;
    auto* repro = app.add_subcommand(
        "repro", "full synthetic normalization/re-ranking comparison");
    repro->fallthrough();
    repro->add_option("--config", repro_args.config)->required();
    repro->add_option("--seed", repro_args.seed, "overrides the config seed");
    repro->add_option("--out", repro_args.out, "report path");
    repro->callback([&] {
        rk_set_threads(threads);
        run_repro(repro, repro_args);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << json{{"error",
                           {{"code", RK_ERROR_INVALID_ARGUMENT},
                            {"status", "invalid_argument"},
                            {"message", e.what()}}}}
                         .dump()
                  << "\n";
        return 1;
    } catch (const CommandError& e) {
        std::cerr << json{{"error",
                           {{"code", e.code},
                            {"status", status_name(e.code)},
                            {"message", e.what()}}}}
                         .dump()
                  << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << json{{"error",
                           {{"code", RK_ERROR_INTERNAL},
                            {"status", "internal"},
                            {"message", e.what()}}}}
                         .dump()
                  << "\n";
        return 1;
    }
    return 0;
}
