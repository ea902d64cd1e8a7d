#include "evaluate/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "core/error.hpp"
#include "core/io.hpp"
#include "core/parallel.hpp"

namespace rankkit {

namespace {

std::size_t locate_bin(double v, const std::vector<double>& edges) {
    const std::size_t bins = edges.size() - 1;
    const double lo = edges.front();
    const double hi = edges.back();
    if (v == hi) return bins - 1;
    // Arithmetic guess, then nudge against the stored edges so membership
    // always agrees with direct comparison at bin boundaries.
    double t = (v - lo) / (hi - lo) * static_cast<double>(bins);
    std::size_t idx = t <= 0.0 ? 0 : static_cast<std::size_t>(t);
    if (idx >= bins) idx = bins - 1;
    while (idx + 1 < bins && v >= edges[idx + 1]) ++idx;
    while (idx > 0 && v < edges[idx]) --idx;
    return idx;
}

Histogram histogram_of_values(const double* values, std::size_t n,
                              std::size_t bins,
                              const std::optional<std::pair<double, double>>&
                                  range) {
    if (bins == 0)
        throw_error(errc::invalid_argument, "bin count must be positive");
    if (n == 0)
        throw_error(errc::invalid_argument, "histogram of no values");

    double lo, hi;
    if (range) {
        lo = range->first;
        hi = range->second;
        if (!(lo < hi)) {
            std::ostringstream msg;
            msg << "histogram range [" << lo << ", " << hi
                << "] is degenerate";
            throw_error(errc::domain, msg.str());
        }
    } else {
        lo = hi = values[0];
        for (std::size_t i = 1; i < n; ++i) {
            lo = std::min(lo, values[i]);
            hi = std::max(hi, values[i]);
        }
        if (lo == hi) {
            // All values identical: collapse to the single bin [v, v].
            Histogram h;
            h.bin_edges = {lo, hi};
            h.counts = {n};
            h.total = n;
            return h;
        }
    }

    Histogram h;
    h.bin_edges.resize(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i)
        h.bin_edges[i] =
            lo + (hi - lo) * (static_cast<double>(i) / static_cast<double>(bins));
    h.bin_edges[0] = lo;
    h.bin_edges[bins] = hi;
    h.counts.assign(bins, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = values[i];
        if (v < lo || v > hi) continue; // explicit range only
        ++h.counts[locate_bin(v, h.bin_edges)];
    }
    for (auto c : h.counts) h.total += c;
    return h;
}

} // namespace

Histogram value_histogram(
    const Matrix& m, std::size_t bins,
    const std::optional<std::pair<double, double>>& range) {
    validate_matrix(m);
    return histogram_of_values(m.data(), m.size(), bins, range);
}

std::vector<double> column_std_profile(const Matrix& m) {
    validate_matrix(m);
    std::vector<double> stds(m.cols(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(m.rows());
    parallel_for(m.cols(), [&](std::size_t c) {
        double sum = 0.0;
        for (std::size_t r = 0; r < m.rows(); ++r) sum += m(r, c);
        const double mean = sum * inv_n;
        double sq = 0.0;
        for (std::size_t r = 0; r < m.rows(); ++r) {
            const double d = m(r, c) - mean;
            sq += d * d;
        }
        stds[c] = std::sqrt(sq * inv_n);
    });
    return stds;
}

CosineStats cosine_similarity_stats(const Matrix& m, const Labels& y,
                                    std::size_t class_index,
                                    std::size_t bins) {
    validate_matrix(m);
    check_labels_match(m, y);
    if (bins == 0)
        throw_error(errc::invalid_argument, "bin count must be positive");

    std::vector<double> inv_norm(m.rows(), 0.0);
    std::size_t zero_norm = 0;
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double sum_sq = 0.0;
        const double* row = m.row(i);
        for (std::size_t c = 0; c < m.cols(); ++c) sum_sq += row[c] * row[c];
        if (sum_sq == 0.0) {
            ++zero_norm;
            continue;
        }
        inv_norm[i] = 1.0 / std::sqrt(sum_sq);
        if (y[i] == static_cast<std::int64_t>(class_index))
            pos.push_back(i);
        else
            neg.push_back(i);
    }
    if (pos.size() < 2) {
        std::ostringstream msg;
        msg << "class " << class_index << " has " << pos.size()
            << " usable positive samples; cosine stats need at least 2";
        throw_error(errc::domain, msg.str());
    }
    if (neg.empty()) {
        std::ostringstream msg;
        msg << "class " << class_index << " has no usable negative samples";
        throw_error(errc::domain, msg.str());
    }

    const auto cosine = [&](std::size_t a, std::size_t b) {
        const double* ra = m.row(a);
        const double* rb = m.row(b);
        double dot = 0.0;
        for (std::size_t c = 0; c < m.cols(); ++c) dot += ra[c] * rb[c];
        // Rounding can push |cos| a hair past 1; keep it inside the range.
        return std::clamp(dot * inv_norm[a] * inv_norm[b], -1.0, 1.0);
    };

    std::vector<double> pos_pos_values;
    pos_pos_values.reserve(pos.size() * (pos.size() - 1) / 2);
    for (std::size_t a = 0; a < pos.size(); ++a)
        for (std::size_t b = a + 1; b < pos.size(); ++b)
            pos_pos_values.push_back(cosine(pos[a], pos[b]));

    std::vector<double> pos_neg_values;
    pos_neg_values.reserve(pos.size() * neg.size());
    for (std::size_t a : pos)
        for (std::size_t b : neg) pos_neg_values.push_back(cosine(a, b));

    const std::optional<std::pair<double, double>> range{{-1.0, 1.0}};
    CosineStats stats;
    stats.pos_pos = histogram_of_values(pos_pos_values.data(),
                                        pos_pos_values.size(), bins, range);
    stats.pos_neg = histogram_of_values(pos_neg_values.data(),
                                        pos_neg_values.size(), bins, range);
    stats.zero_norm_excluded = zero_norm;
    return stats;
}

nlohmann::json histogram_to_json(const Histogram& h) {
    return nlohmann::json{
        {"bin_edges", h.bin_edges},
        {"counts", h.counts},
        {"total", h.total},
    };
}

namespace {

// Classes covered by a stats report: the requested one, or every class with
// enough usable samples when class_index < 0.
std::vector<std::size_t> report_classes(const Matrix& m, const Labels& y,
                                        std::int64_t class_index) {
    if (class_index >= 0) return {static_cast<std::size_t>(class_index)};
    std::int64_t max_label = 0;
    for (auto v : y) max_label = std::max(max_label, v);
    std::vector<std::size_t> eligible;
    for (std::int64_t k = 0; k <= max_label; ++k) {
        std::size_t pos = 0, neg = 0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double* row = m.row(i);
            double sum_sq = 0.0;
            for (std::size_t c = 0; c < m.cols(); ++c)
                sum_sq += row[c] * row[c];
            if (sum_sq == 0.0) continue;
            (y[i] == k ? pos : neg) += 1;
        }
        if (pos >= 2 && neg >= 1) eligible.push_back(static_cast<std::size_t>(k));
    }
    return eligible;
}

} // namespace

nlohmann::json stats_report(const Matrix& m, const Labels* y,
                            std::int64_t class_index, std::size_t bins) {
    validate_matrix(m);
    nlohmann::json doc{
        {"shape", {{"rows", m.rows()}, {"cols", m.cols()}}},
        {"value_histogram", histogram_to_json(value_histogram(m, bins))},
        {"std_profile", column_std_profile(m)},
    };
    if (y) {
        check_labels_match(m, *y);
        nlohmann::json cosine = nlohmann::json::array();
        for (std::size_t k : report_classes(m, *y, class_index)) {
            const CosineStats stats = cosine_similarity_stats(m, *y, k, bins);
            cosine.push_back(nlohmann::json{
                {"class", k},
                {"pos_pos", histogram_to_json(stats.pos_pos)},
                {"pos_neg", histogram_to_json(stats.pos_neg)},
                {"zero_norm_excluded", stats.zero_norm_excluded},
            });
        }
        doc["cosine"] = std::move(cosine);
    }
    return doc;
}

namespace {

void write_histogram_csv(const Histogram& h, const std::string& path) {
    std::ostringstream out;
    out << "bin_lo,bin_hi,count\n";
    for (std::size_t b = 0; b < h.counts.size(); ++b)
        out << io::format_double(h.bin_edges[b]) << ','
            << io::format_double(h.bin_edges[b + 1]) << ',' << h.counts[b]
            << '\n';
    io::write_text_file(path, out.str());
}

} // namespace

void write_stats_csv(const Matrix& m, const Labels* y,
                     std::int64_t class_index, std::size_t bins,
                     const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw_error(errc::io, dir + ": cannot create directory (" +
                                  ec.message() + ")");
    const std::filesystem::path base(dir);

    write_histogram_csv(value_histogram(m, bins),
                        (base / "value_histogram.csv").string());

    const auto stds = column_std_profile(m);
    std::ostringstream profile;
    profile << "dim,std\n";
    for (std::size_t c = 0; c < stds.size(); ++c)
        profile << c << ',' << io::format_double(stds[c]) << '\n';
    io::write_text_file((base / "std_profile.csv").string(), profile.str());

    if (y) {
        check_labels_match(m, *y);
        for (std::size_t k : report_classes(m, *y, class_index)) {
            const CosineStats stats = cosine_similarity_stats(m, *y, k, bins);
            std::ostringstream name;
            name << "cosine_class" << k;
            write_histogram_csv(
                stats.pos_pos, (base / (name.str() + "_pos_pos.csv")).string());
            write_histogram_csv(
                stats.pos_neg, (base / (name.str() + "_pos_neg.csv")).string());
        }
    }
}

} // namespace rankkit
