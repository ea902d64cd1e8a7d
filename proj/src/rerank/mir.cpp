#include "rerank/mir.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace rankkit {

void validate_mir_params(const MirParams& params) {
    std::ostringstream msg;
    if (!(params.eta > 0.0)) {
        msg << "eta must be positive, got " << params.eta;
        throw_error(errc::domain, msg.str());
    }
    if (!(params.beta > 0.0)) {
        msg << "beta must be positive, got " << params.beta;
        throw_error(errc::domain, msg.str());
    }
    if (params.iters < 1)
        throw_error(errc::domain, "iteration count must be at least 1");
}

Matrix mir_rerank(const Matrix& scores, const MirParams& params,
                  MirTrace* trace) {
    validate_matrix(scores, "score matrix");
    validate_mir_params(params);

    const std::size_t k = scores.cols();
    if (trace) {
        trace->snapshots.clear();
        trace->max_abs_update.clear();
        trace->snapshots.push_back(scores);
    }

    // Positional weights exp(-beta*r), r = 1..K-1, shared by every sweep.
    std::vector<double> weight(k, 0.0);
    for (std::size_t r = 1; r < k; ++r)
        weight[r] = std::exp(-params.beta * static_cast<double>(r));

    Matrix prev = scores;
    Matrix next(scores.rows(), k);
    double anneal = 1.0;
    for (std::size_t sweep = 1; sweep < params.iters; ++sweep) {
        parallel_chunks(prev.rows(), [&](std::size_t begin, std::size_t end) {
            std::vector<double> sorted(k);
            for (std::size_t i = begin; i < end; ++i) {
                const double* row = prev.row(i);
                std::copy(row, row + k, sorted.begin());
                std::sort(sorted.begin(), sorted.end(),
                          std::greater<double>());
                for (std::size_t j = 0; j < k; ++j) {
                    const double self = row[j];
                    // Drop one occurrence of the entry's own value; equal
                    // values are interchangeable in a value-weighted sum,
                    // so which duplicate is dropped cannot matter.
                    double sum = 0.0;
                    bool skipped = false;
                    std::size_t r = 1;
                    for (std::size_t t = 0; t < k; ++t) {
                        if (!skipped && sorted[t] == self) {
                            skipped = true;
                            continue;
                        }
                        sum += weight[r] * sorted[t];
                        ++r;
                    }
                    next(i, j) = self - anneal * sum;
                }
            }
        });
        if (trace) {
            double max_update = 0.0;
            for (std::size_t idx = 0; idx < prev.size(); ++idx) {
                const double d = std::abs(next.data()[idx] - prev.data()[idx]);
                if (d > max_update) max_update = d;
            }
            trace->max_abs_update.push_back(max_update);
            trace->snapshots.push_back(next);
        }
        std::swap(prev, next);
        anneal *= params.eta;
    }
    return prev;
}

std::string mir_trace_to_json(const MirTrace& trace) {
    nlohmann::json snapshots = nlohmann::json::array();
    for (const Matrix& m : trace.snapshots) {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t r = 0; r < m.rows(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
            rows.push_back(std::move(row));
        }
        snapshots.push_back(std::move(rows));
    }
    nlohmann::json doc{
        {"iterations", trace.snapshots.size()},
        {"snapshots", std::move(snapshots)},
        {"max_abs_update", trace.max_abs_update},
    };
    return doc.dump();
}

MinMaxMode parse_minmax_mode(const std::string& name) {
    if (name == "per_row") return MinMaxMode::per_row;
    if (name == "global") return MinMaxMode::global;
    throw_error(errc::invalid_argument,
                "unknown min-max mode '" + name + "' (per_row or global)");
}

namespace {

void minmax_into(const double* src, double* dst, std::size_t n, double lo,
                 double hi) {
    if (lo == hi) {
        for (std::size_t i = 0; i < n; ++i) dst[i] = 0.5;
        return;
    }
    const double inv_span = 1.0 / (hi - lo);
    for (std::size_t i = 0; i < n; ++i) dst[i] = (src[i] - lo) * inv_span;
}

} // namespace

Matrix minmax_normalize_scores(const Matrix& scores, MinMaxMode mode) {
    validate_matrix(scores, "score matrix");
    Matrix out(scores.rows(), scores.cols());
    if (mode == MinMaxMode::per_row) {
        parallel_chunks(scores.rows(),
                        [&](std::size_t begin, std::size_t end) {
                            for (std::size_t i = begin; i < end; ++i) {
                                const double* row = scores.row(i);
                                const auto [lo, hi] = std::minmax_element(
                                    row, row + scores.cols());
                                minmax_into(row, out.row(i), scores.cols(),
                                            *lo, *hi);
                            }
                        });
    } else {
        const auto [lo, hi] = std::minmax_element(
            scores.data(), scores.data() + scores.size());
        const double lo_v = *lo, hi_v = *hi;
        parallel_chunks(scores.rows(),
                        [&](std::size_t begin, std::size_t end) {
                            for (std::size_t i = begin; i < end; ++i)
                                minmax_into(scores.row(i), out.row(i),
                                            scores.cols(), lo_v, hi_v);
                        });
    }
    return out;
}

std::vector<double> rolloff_profile(const Matrix& scores, std::size_t row) {
    validate_matrix(scores, "score matrix");
    if (row >= scores.rows()) {
        std::ostringstream msg;
        msg << "row index " << row << " out of range for " << scores.rows()
            << " rows";
        throw_error(errc::invalid_argument, msg.str());
    }
    const double* src = scores.row(row);
    const auto [lo, hi] = std::minmax_element(src, src + scores.cols());
    std::vector<double> profile(scores.cols());
    minmax_into(src, profile.data(), scores.cols(), *lo, *hi);
    std::sort(profile.begin(), profile.end(), std::greater<double>());
    return profile;
}

} // namespace rankkit
