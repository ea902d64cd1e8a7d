#include "experiment/repro.hpp"

#include <sstream>

#include "core/error.hpp"
#include "core/rng.hpp"
#include "evaluate/metrics.hpp"

namespace rankkit {

using nlohmann::json;

namespace {

[[noreturn]] void bad_config(const std::string& what) {
    throw_error(errc::format, "run config: " + what);
}

void check_keys(const json& obj, const char* section,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object())
        bad_config(std::string(section) + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        bool known = false;
        for (const char* name : allowed)
            if (key == name) known = true;
        if (!known)
            bad_config(std::string(section) + " has unknown key '" + key +
                       "'");
    }
}

double get_number(const json& obj, const char* section, const char* key,
                  double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number())
        bad_config(std::string(section) + "." + key + " must be a number");
    return obj.at(key).get<double>();
}

std::uint64_t get_count(const json& obj, const char* section, const char* key,
                        std::uint64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    bad_config(std::string(section) + "." + key +
               " must be a non-negative integer");
}

} // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        bad_config(std::string("invalid JSON: ") + e.what());
    }
    check_keys(doc, "config",
               {"seed", "synth", "split", "classifier", "mir", "rank"});

    RunConfig cfg;
    if (doc.contains("seed"))
        cfg.seed = get_count(doc, "config", "seed", 0);

    if (doc.contains("synth")) {
        const json& s = doc.at("synth");
        check_keys(s, "synth",
                   {"n_per_class", "classes", "dims", "p_sparse", "burst_dims",
                    "burst_scale", "signal_strength", "noise_sigma"});
        cfg.synth.n_per_class = static_cast<std::size_t>(
            get_count(s, "synth", "n_per_class", cfg.synth.n_per_class));
        cfg.synth.classes = static_cast<std::size_t>(
            get_count(s, "synth", "classes", cfg.synth.classes));
        cfg.synth.dims = static_cast<std::size_t>(
            get_count(s, "synth", "dims", cfg.synth.dims));
        cfg.synth.p_sparse =
            get_number(s, "synth", "p_sparse", cfg.synth.p_sparse);
        cfg.synth.burst_dims = static_cast<std::size_t>(
            get_count(s, "synth", "burst_dims", cfg.synth.burst_dims));
        cfg.synth.burst_scale =
            get_number(s, "synth", "burst_scale", cfg.synth.burst_scale);
        cfg.synth.signal_strength = get_number(s, "synth", "signal_strength",
                                               cfg.synth.signal_strength);
        cfg.synth.noise_sigma =
            get_number(s, "synth", "noise_sigma", cfg.synth.noise_sigma);
    }

    if (doc.contains("split")) {
        const json& s = doc.at("split");
        check_keys(s, "split", {"train_fraction"});
        cfg.train_fraction =
            get_number(s, "split", "train_fraction", cfg.train_fraction);
    }

    if (doc.contains("classifier")) {
        const json& s = doc.at("classifier");
        check_keys(s, "classifier",
                   {"c", "epochs", "learning_rate", "init_noise"});
        cfg.classifier.c = get_number(s, "classifier", "c", cfg.classifier.c);
        cfg.classifier.epochs = static_cast<std::size_t>(
            get_count(s, "classifier", "epochs", cfg.classifier.epochs));
        cfg.classifier.learning_rate = get_number(
            s, "classifier", "learning_rate", cfg.classifier.learning_rate);
        cfg.classifier.init_noise = get_number(s, "classifier", "init_noise",
                                               cfg.classifier.init_noise);
    }

    if (doc.contains("mir")) {
        const json& s = doc.at("mir");
        check_keys(s, "mir", {"eta", "beta", "iters"});
        cfg.mir.eta = get_number(s, "mir", "eta", cfg.mir.eta);
        cfg.mir.beta = get_number(s, "mir", "beta", cfg.mir.beta);
        cfg.mir.iters = static_cast<std::size_t>(
            get_count(s, "mir", "iters", cfg.mir.iters));
    }

    if (doc.contains("rank")) {
        const json& s = doc.at("rank");
        check_keys(s, "rank", {"tie", "subset_sizes"});
        if (s.contains("tie")) {
            if (!s.at("tie").is_string())
                bad_config("rank.tie must be a string");
            try {
                cfg.tie = parse_tie_policy(s.at("tie").get<std::string>());
            } catch (const error&) {
                bad_config("rank.tie names an unknown tie policy '" +
                           s.at("tie").get<std::string>() + "'");
            }
        }
        if (s.contains("subset_sizes")) {
            if (!s.at("subset_sizes").is_array() ||
                s.at("subset_sizes").empty())
                bad_config("rank.subset_sizes must be a non-empty array");
            cfg.subset_sizes.clear();
            for (const auto& v : s.at("subset_sizes")) {
                if (!v.is_number_integer() || v.get<std::int64_t>() < 1)
                    bad_config("rank.subset_sizes entries must be positive "
                               "integers");
                cfg.subset_sizes.push_back(
                    static_cast<std::size_t>(v.get<std::int64_t>()));
            }
        }
    }
    return cfg;
}

json run_config_to_json(const RunConfig& cfg) {
    json doc{
        {"synth",
         {{"n_per_class", cfg.synth.n_per_class},
          {"classes", cfg.synth.classes},
          {"dims", cfg.synth.dims},
          {"p_sparse", cfg.synth.p_sparse},
          {"burst_dims", cfg.synth.burst_dims},
          {"burst_scale", cfg.synth.burst_scale},
          {"signal_strength", cfg.synth.signal_strength},
          {"noise_sigma", cfg.synth.noise_sigma}}},
        {"split", {{"train_fraction", cfg.train_fraction}}},
        {"classifier",
         {{"c", cfg.classifier.c},
          {"epochs", cfg.classifier.epochs},
          {"learning_rate", cfg.classifier.learning_rate},
          {"init_noise", cfg.classifier.init_noise}}},
        {"mir",
         {{"eta", cfg.mir.eta},
          {"beta", cfg.mir.beta},
          {"iters", cfg.mir.iters}}},
        {"rank",
         {{"tie", tie_policy_name(cfg.tie)},
          {"subset_sizes", cfg.subset_sizes}}},
    };
    if (cfg.seed) doc["seed"] = *cfg.seed;
    return doc;
}

std::uint64_t repro_synth_seed(std::uint64_t seed) {
    return derive_seed(seed, 1);
}
std::uint64_t repro_split_seed(std::uint64_t seed) {
    return derive_seed(seed, 2);
}
std::uint64_t repro_train_seed(std::uint64_t seed) {
    return derive_seed(seed, 3);
}
std::uint64_t repro_ref_seed(std::uint64_t seed, std::size_t subset_size,
                             std::size_t repeat) {
    return derive_seed(derive_seed(seed, 4),
                       static_cast<std::uint64_t>(subset_size) * 1000003ULL +
                           static_cast<std::uint64_t>(repeat));
}

namespace {

std::uint64_t require_seed(const RunConfig& cfg) {
    if (!cfg.seed)
        throw_error(errc::invalid_argument,
                    "run config has no seed; pass one explicitly");
    return *cfg.seed;
}

PipelineStep l2_step() {
    PipelineStep s;
    s.kind = PipelineStep::Kind::l2;
    return s;
}

PipelineStep power_step(double alpha) {
    PipelineStep s;
    s.kind = PipelineStep::Kind::power;
    s.alpha = alpha;
    return s;
}

PipelineStep rank_approx_fit_step(std::size_t subset_size,
                                  std::uint64_t seed) {
    PipelineStep s;
    s.kind = PipelineStep::Kind::rank_approx;
    s.fit_from_input = true;
    s.subset_size = subset_size;
    s.seed = seed;
    return s;
}

PipelineStep rank_approx_ref_step() {
    PipelineStep s;
    s.kind = PipelineStep::Kind::rank_approx;
    return s;
}

} // namespace

ReproData prepare_repro_data(const RunConfig& cfg) {
    const std::uint64_t seed = require_seed(cfg);
    SynthParams synth = cfg.synth;
    synth.seed = repro_synth_seed(seed);
    auto [features, labels] = generate_sparse_bursty(synth);
    Split split = benchmark_split(features, labels, cfg.train_fraction,
                                  repro_split_seed(seed));
    return {std::move(split.train_x), std::move(split.train_y),
            std::move(split.test_x), std::move(split.test_y)};
}

double arm_map(const ReproData& data, const RunConfig& cfg,
               const Pipeline& train_pipe, const Pipeline& test_pipe,
               double* map_mir) {
    const std::uint64_t seed = require_seed(cfg);
    std::optional<RankReference> fitted;
    const Matrix train = apply_pipeline(data.train_x, train_pipe, nullptr,
                                        &fitted);
    const Matrix test = apply_pipeline(data.test_x, test_pipe,
                                       fitted ? &*fitted : nullptr);
    const LinearModel model = train_ovr_linear(train, data.train_y,
                                               cfg.classifier,
                                               repro_train_seed(seed));
    const Matrix scores = predict_scores(model, test);
    const double map = mean_average_precision(scores, data.test_y);
    if (map_mir) {
        const Matrix reranked = mir_rerank(scores, cfg.mir);
        *map_mir = mean_average_precision(reranked, data.test_y);
    }
    return map;
}

json run_repro(const RunConfig& cfg) {
    const std::uint64_t seed = require_seed(cfg);
    const ReproData data = prepare_repro_data(cfg);

    struct Arm {
        std::string name;
        Pipeline train_pipe;
        Pipeline test_pipe;
        std::optional<std::size_t> subset_size;
    };
    std::vector<Arm> arms;
    arms.push_back({"l2", Pipeline{{l2_step()}}, Pipeline{{l2_step()}}, {}});
    arms.push_back({"power_l2", Pipeline{{power_step(0.5), l2_step()}},
                    Pipeline{{power_step(0.5), l2_step()}}, {}});
    // The rank arm maps both splits through the training split's empirical
    // per-dimension distribution: a reference holding every training row.
    // Ranking the test split against itself would let test rows see each
    // other, and the approximate arms could never match that.
    const std::size_t full = data.train_x.rows();
    arms.push_back(
        {"rank_exact_l2",
         Pipeline{{rank_approx_fit_step(full, repro_ref_seed(seed, full, 0)),
                   l2_step()}},
         Pipeline{{rank_approx_ref_step(), l2_step()}}, {}});
    for (std::size_t s : cfg.subset_sizes) {
        std::ostringstream name;
        name << "rank_approx_l2_s" << s;
        arms.push_back(
            {name.str(),
             Pipeline{{rank_approx_fit_step(s, repro_ref_seed(seed, s, 0)),
                       l2_step()}},
             Pipeline{{rank_approx_ref_step(), l2_step()}}, s});
    }

    json entries = json::array();
    for (const Arm& arm : arms) {
        double map_mir = 0.0;
        const double map = arm_map(data, cfg, arm.train_pipe, arm.test_pipe,
                                   &map_mir);
        json entry{
            {"name", arm.name},
            {"pipeline", json::parse(pipeline_to_json(arm.train_pipe))},
            {"map", map},
            {"map_mir", map_mir},
        };
        if (arm.subset_size) entry["subset_size"] = *arm.subset_size;
        entries.push_back(std::move(entry));
    }

    RunConfig effective = cfg;
    effective.seed = seed;
    return json{
        {"config", run_config_to_json(effective)},
        {"data",
         {{"classes", cfg.synth.classes},
          {"dims", cfg.synth.dims},
          {"train_rows", data.train_x.rows()},
          {"test_rows", data.test_x.rows()}}},
        {"pipelines", std::move(entries)},
    };
}

} // namespace rankkit
