#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "classify/linear.hpp"
#include "core/matrix.hpp"
#include "normalize/pipeline.hpp"
#include "rerank/mir.hpp"
#include "synth/generator.hpp"

namespace rankkit {

// One experiment run: synthetic data parameters, split, classifier and
// re-ranking settings, and the approximate-ranking subset sizes to sweep.
// The single top-level seed drives every random stream in the run.
struct RunConfig {
    SynthParams synth;
    double train_fraction = 0.5;
    TrainParams classifier;
    MirParams mir;
    TiePolicy tie = TiePolicy::average;
    std::vector<std::size_t> subset_sizes{1, 5, 10, 50, 100};
    std::optional<std::uint64_t> seed;
};

// Strict parse: unknown keys anywhere are rejected. Absent sections keep
// their defaults; "seed" may be omitted and supplied by the caller instead.
RunConfig parse_run_config(const std::string& json_text);
nlohmann::json run_config_to_json(const RunConfig& cfg);

// Deterministic sub-stream seeds of a run.
std::uint64_t repro_synth_seed(std::uint64_t seed);
std::uint64_t repro_split_seed(std::uint64_t seed);
std::uint64_t repro_train_seed(std::uint64_t seed);
std::uint64_t repro_ref_seed(std::uint64_t seed, std::size_t subset_size,
                             std::size_t repeat);

struct ReproData {
    Matrix train_x;
    Labels train_y;
    Matrix test_x;
    Labels test_y;
};

// Generates the synthetic dataset and splits it, both from seeds derived
// from cfg.seed (which must be set).
ReproData prepare_repro_data(const RunConfig& cfg);

// Test-split mAP of one experiment arm: normalize both splits (a reference
// fitted by the train pipeline is forwarded to the test pipeline), train,
// predict, evaluate. With map_mir non-null, also re-ranks the test scores
// and reports the re-ranked mAP.
double arm_map(const ReproData& data, const RunConfig& cfg,
               const Pipeline& train_pipe, const Pipeline& test_pipe,
               double* map_mir = nullptr);

// Full comparison: pipelines [l2], [power(0.5), l2], [rank_exact, l2] and
// [rank_approx(S), l2] for each configured subset size, each evaluated with
// and without re-ranking. Returns the report document.
nlohmann::json run_repro(const RunConfig& cfg);

} // namespace rankkit
