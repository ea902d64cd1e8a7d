#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/matrix.hpp"
#include "normalize/normalize.hpp"

namespace rankkit {

// One normalization step. Which fields matter depends on kind; parsing
// fills the rest with defaults.
struct PipelineStep {
    enum class Kind { l2, power, rank_exact, rank_approx, within_group_rank };

    Kind kind = Kind::l2;
    double alpha = 0.5;                 // power
    TiePolicy tie = TiePolicy::average; // rank_exact, within_group_rank
    bool fit_from_input = false;        // rank_approx: fit vs supplied ref
    std::size_t subset_size = 0;        // rank_approx, fit mode
    std::uint64_t seed = 0;             // rank_approx, fit mode
};

struct Pipeline {
    std::vector<PipelineStep> steps;
};

// Accepts {"steps":[{"rank_exact":{"tie":"average"}},{"l2":{}}]} and
// rejects empty pipelines, unknown step kinds and unknown option keys.
// A rank_approx step is either {} (a reference must be supplied when the
// pipeline is applied) or {"s": <count>, "seed": <u64>} (fit from input).
Pipeline parse_pipeline(const std::string& json_text);

// Canonical serialization: every applicable option explicit, keys sorted.
// parse(to_json(p)) reproduces p.
std::string pipeline_to_json(const Pipeline& p);

// Applies steps left to right. train_ref backs rank_approx steps without
// fit parameters. If fitted_out is non-null, the reference fitted by the
// last fit-mode rank_approx step is stored there (nullopt when none ran).
Matrix apply_pipeline(const Matrix& m, const Pipeline& p,
                      const RankReference* train_ref = nullptr,
                      std::optional<RankReference>* fitted_out = nullptr);

} // namespace rankkit
