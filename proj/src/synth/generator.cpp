#include "synth/generator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace rankkit {

void validate_synth_params(const SynthParams& params) {
    if (params.n_per_class < 1 || params.classes < 1 || params.dims < 1)
        throw_error(errc::invalid_argument,
                    "n_per_class, classes and dims must all be positive");
    if (!(params.p_sparse >= 0.0 && params.p_sparse < 1.0)) {
        std::ostringstream msg;
        msg << "p_sparse must lie in [0, 1), got " << params.p_sparse;
        throw_error(errc::domain, msg.str());
    }
    if (params.burst_dims > params.dims)
        throw_error(errc::invalid_argument,
                    "burst_dims cannot exceed dims");
    if (!(params.burst_scale >= 0.0))
        throw_error(errc::domain, "burst_scale must be non-negative");
    if (!(params.signal_strength > 0.0))
        throw_error(errc::domain, "signal_strength must be positive");
    if (!(params.noise_sigma > 0.0))
        throw_error(errc::domain, "noise_sigma must be positive");
}

std::pair<Matrix, Labels> generate_sparse_bursty(const SynthParams& params) {
    validate_synth_params(params);
    const std::size_t n = params.n_per_class * params.classes;
    const std::size_t d = params.dims;
    const std::size_t block = d / params.classes;

    // Per-class masks: where the class mean is signal_strength, and which
    // dimensions get burst multipliers.
    std::vector<std::vector<char>> signal(params.classes,
                                          std::vector<char>(d, 0));
    std::vector<std::vector<char>> burst(params.classes,
                                         std::vector<char>(d, 0));
    for (std::size_t k = 0; k < params.classes; ++k) {
        for (std::size_t t = 0; t < block; ++t) signal[k][k * block + t] = 1;
        for (std::size_t t = 0; t < params.burst_dims; ++t)
            burst[k][(k * block + t) % d] = 1;
    }

    Matrix features(n, d);
    Labels labels(n, 0);
    Rng rng(params.seed);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = i / params.n_per_class;
        labels[i] = static_cast<std::int64_t>(k);
        double* row = features.row(i);
        for (std::size_t c = 0; c < d; ++c) {
            if (rng.next_double() < params.p_sparse) {
                row[c] = 0.0;
                continue;
            }
            const double mean = signal[k][c] ? params.signal_strength : 0.0;
            double value = mean + params.noise_sigma * rng.next_gaussian();
            if (burst[k][c])
                value *= std::exp(params.burst_scale * rng.next_gaussian());
            row[c] = value;
        }
    }
    return {std::move(features), std::move(labels)};
}

Split benchmark_split(const Matrix& features, const Labels& labels,
                      double train_fraction, std::uint64_t seed) {
    validate_matrix(features, "feature matrix");
    check_labels_match(features, labels);
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        std::ostringstream msg;
        msg << "train fraction must lie in (0, 1), got " << train_fraction;
        throw_error(errc::domain, msg.str());
    }

    std::int64_t max_label = 0;
    for (auto v : labels) {
        if (v < 0)
            throw_error(errc::invalid_argument, "labels must be non-negative");
        max_label = std::max(max_label, v);
    }

    std::vector<std::size_t> train_rows, test_rows;
    for (std::int64_t k = 0; k <= max_label; ++k) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == k) members.push_back(i);
        if (members.empty()) continue;
        if (members.size() < 2) {
            std::ostringstream msg;
            msg << "class " << k << " has " << members.size()
                << " sample(s); stratified splitting needs at least 2";
            throw_error(errc::invalid_argument, msg.str());
        }
        auto take = static_cast<std::size_t>(std::llround(
            train_fraction * static_cast<double>(members.size())));
        take = std::clamp(take, std::size_t{1}, members.size() - 1);

        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
        const auto picked = sample_indices(members.size(), take, rng);
        std::vector<char> in_train(members.size(), 0);
        for (std::size_t p : picked) in_train[p] = 1;
        for (std::size_t p = 0; p < members.size(); ++p)
            (in_train[p] ? train_rows : test_rows).push_back(members[p]);
    }

    // Original row order on both sides keeps the split independent of the
    // per-class draw order.
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(test_rows.begin(), test_rows.end());

    const auto gather = [&](const std::vector<std::size_t>& rows, Matrix& x,
                            Labels& y) {
        x = Matrix(rows.size(), features.cols());
        y.resize(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const double* src = features.row(rows[i]);
            std::copy(src, src + features.cols(), x.row(i));
            y[i] = labels[rows[i]];
        }
    };

    Split split;
    gather(train_rows, split.train_x, split.train_y);
    gather(test_rows, split.test_x, split.test_y);
    return split;
}

} // namespace rankkit
