#include "normalize/pipeline.hpp"

#include <sstream>

#include <json.hpp>

#include "core/error.hpp"

namespace rankkit {

using nlohmann::json;

namespace {

[[noreturn]] void bad_pipeline(const std::string& what) {
    throw_error(errc::format, "pipeline: " + what);
}

void reject_unknown_keys(const json& options, const char* kind,
                         std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : options.items()) {
        (void)value;
        bool known = false;
        for (const char* name : allowed)
            if (key == name) known = true;
        if (!known)
            bad_pipeline("step '" + std::string(kind) +
                         "' has unknown option '" + key + "'");
    }
}

// Inside a pipeline document a bad tie name is a document problem, so the
// invalid_argument from parse_tie_policy becomes a format error here.
TiePolicy require_tie(const json& options, const char* kind) {
    if (!options.at("tie").is_string())
        bad_pipeline(std::string(kind) + " tie must be a string");
    try {
        return parse_tie_policy(options.at("tie").get<std::string>());
    } catch (const error&) {
        bad_pipeline(std::string(kind) + " has an unknown tie policy '" +
                     options.at("tie").get<std::string>() + "'");
    }
}

double require_number(const json& options, const char* kind,
                      const char* key, double fallback) {
    if (!options.contains(key)) return fallback;
    const json& v = options.at(key);
    if (!v.is_number())
        bad_pipeline("step '" + std::string(kind) + "' option '" + key +
                     "' must be a number");
    return v.get<double>();
}

std::uint64_t require_u64(const json& options, const char* kind,
                          const char* key) {
    const json& v = options.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    bad_pipeline("step '" + std::string(kind) + "' option '" + key +
                 "' must be a non-negative integer");
}

PipelineStep parse_step(const json& element, std::size_t index) {
    if (!element.is_object() || element.size() != 1) {
        std::ostringstream msg;
        msg << "step " << index
            << " must be an object with exactly one step kind";
        bad_pipeline(msg.str());
    }
    const std::string kind = element.begin().key();
    const json& options = element.begin().value();
    if (!options.is_object())
        bad_pipeline("step '" + kind + "' options must be an object");

    PipelineStep step;
    if (kind == "l2") {
        step.kind = PipelineStep::Kind::l2;
        reject_unknown_keys(options, "l2", {});
    } else if (kind == "power") {
        step.kind = PipelineStep::Kind::power;
        reject_unknown_keys(options, "power", {"alpha"});
        step.alpha = require_number(options, "power", "alpha", 0.5);
        if (!(step.alpha >= 0.0 && step.alpha <= 1.0))
            bad_pipeline("power alpha must lie in [0, 1]");
    } else if (kind == "rank_exact") {
        step.kind = PipelineStep::Kind::rank_exact;
        reject_unknown_keys(options, "rank_exact", {"tie"});
        if (options.contains("tie"))
            step.tie = require_tie(options, "rank_exact");
    } else if (kind == "rank_approx") {
        step.kind = PipelineStep::Kind::rank_approx;
        reject_unknown_keys(options, "rank_approx", {"s", "seed"});
        if (options.contains("s") != options.contains("seed"))
            bad_pipeline("rank_approx needs both 's' and 'seed' to fit from "
                         "its input, or neither to use a supplied reference");
        if (options.contains("s")) {
            const std::uint64_t s = require_u64(options, "rank_approx", "s");
            if (s == 0) bad_pipeline("rank_approx 's' must be positive");
            step.fit_from_input = true;
            step.subset_size = static_cast<std::size_t>(s);
            step.seed = require_u64(options, "rank_approx", "seed");
        }
    } else if (kind == "within_group_rank") {
        step.kind = PipelineStep::Kind::within_group_rank;
        reject_unknown_keys(options, "within_group_rank", {"tie"});
        if (options.contains("tie"))
            step.tie = require_tie(options, "within_group_rank");
    } else {
        bad_pipeline("unknown step kind '" + kind + "'");
    }
    return step;
}

} // namespace

Pipeline parse_pipeline(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        bad_pipeline(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) bad_pipeline("top level must be an object");
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (key != "steps") bad_pipeline("unknown key '" + key + "'");
    }
    if (!doc.contains("steps") || !doc.at("steps").is_array())
        bad_pipeline("'steps' array is required");
    const json& steps = doc.at("steps");
    if (steps.empty()) bad_pipeline("'steps' must not be empty");

    Pipeline p;
    p.steps.reserve(steps.size());
    for (std::size_t i = 0; i < steps.size(); ++i)
        p.steps.push_back(parse_step(steps.at(i), i));
    return p;
}

std::string pipeline_to_json(const Pipeline& p) {
    json steps = json::array();
    for (const PipelineStep& step : p.steps) {
        json options = json::object();
        const char* kind = nullptr;
        switch (step.kind) {
            case PipelineStep::Kind::l2:
                kind = "l2";
                break;
            case PipelineStep::Kind::power:
                kind = "power";
                options["alpha"] = step.alpha;
                break;
            case PipelineStep::Kind::rank_exact:
                kind = "rank_exact";
                options["tie"] = tie_policy_name(step.tie);
                break;
            case PipelineStep::Kind::rank_approx:
                kind = "rank_approx";
                if (step.fit_from_input) {
                    options["s"] = step.subset_size;
                    options["seed"] = step.seed;
                }
                break;
            case PipelineStep::Kind::within_group_rank:
                kind = "within_group_rank";
                options["tie"] = tie_policy_name(step.tie);
                break;
        }
        steps.push_back(json{{kind, options}});
    }
    return json{{"steps", steps}}.dump();
}

Matrix apply_pipeline(const Matrix& m, const Pipeline& p,
                      const RankReference* train_ref,
                      std::optional<RankReference>* fitted_out) {
    if (p.steps.empty())
        throw_error(errc::invalid_argument, "pipeline has no steps");
    if (fitted_out) fitted_out->reset();

    Matrix current = m;
    for (const PipelineStep& step : p.steps) {
        switch (step.kind) {
            case PipelineStep::Kind::l2:
                current = l2_normalize(current);
                break;
            case PipelineStep::Kind::power:
                current = power_normalize(current, step.alpha);
                break;
            case PipelineStep::Kind::rank_exact:
                current = rank_normalize_exact(current, step.tie);
                break;
            case PipelineStep::Kind::rank_approx:
                if (step.fit_from_input) {
                    RankReference ref = fit_rank_reference(
                        current, step.subset_size, step.seed);
                    current = rank_normalize_approx(current, ref);
                    if (fitted_out) *fitted_out = std::move(ref);
                } else {
                    if (!train_ref)
                        throw_error(errc::invalid_argument,
                                    "pipeline step rank_approx has no fit "
                                    "parameters and no reference was "
                                    "supplied");
                    current = rank_normalize_approx(current, *train_ref);
                }
                break;
            case PipelineStep::Kind::within_group_rank:
                // A single matrix is one group.
                current = rank_normalize_exact(current, step.tie);
                break;
        }
    }
    return current;
}

} // namespace rankkit
