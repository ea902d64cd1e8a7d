#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "core/matrix.hpp"

namespace rankkit {

// Fixed-width histogram. Edges are strictly ascending except for the
// documented degenerate case: an auto-ranged histogram of identical values
// collapses to the single bin [v, v]. Out-of-range values (possible only
// with an explicit range) are not counted, so total always equals the sum
// of counts.
struct Histogram {
    std::vector<double> bin_edges;       // bins + 1
    std::vector<std::uint64_t> counts;   // bins
    std::uint64_t total = 0;
};

// Histogram over all rows*cols values. Without an explicit range the data
// min/max is used. Values equal to the upper edge land in the last bin.
Histogram value_histogram(
    const Matrix& m, std::size_t bins,
    const std::optional<std::pair<double, double>>& range = std::nullopt);

// Population standard deviation of each column.
std::vector<double> column_std_profile(const Matrix& m);

// Cosine-similarity distributions for one class: all unordered pairs of
// positive rows, and all positive-negative pairs. Rows with zero norm have
// no direction and are excluded; their count is reported.
struct CosineStats {
    Histogram pos_pos;
    Histogram pos_neg;
    std::size_t zero_norm_excluded = 0;
};

// Requires, after zero-norm exclusion, at least two positives and one
// negative for the class. Cosine histograms span [-1, 1].
CosineStats cosine_similarity_stats(const Matrix& m, const Labels& y,
                                    std::size_t class_index,
                                    std::size_t bins);

nlohmann::json histogram_to_json(const Histogram& h);

// Full diagnostics document: shape, value histogram, per-column std and,
// when labels are present, cosine stats. class_index < 0 covers every class
// with enough eligible samples; a fixed class must be eligible or the call
// throws.
nlohmann::json stats_report(const Matrix& m, const Labels* y,
                            std::int64_t class_index, std::size_t bins);

// Same diagnostics as CSV files under dir: value_histogram.csv,
// std_profile.csv and cosine_class<k>_{pos_pos,pos_neg}.csv.
void write_stats_csv(const Matrix& m, const Labels* y,
                     std::int64_t class_index, std::size_t bins,
                     const std::string& dir);

} // namespace rankkit
