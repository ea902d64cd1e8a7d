#include "evaluate/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace rankkit {

double average_precision(const double* scores, const unsigned char* relevant,
                         std::size_t n) {
    if (n == 0)
        throw_error(errc::invalid_argument, "ranked list is empty");
    if (!scores || !relevant)
        throw_error(errc::invalid_argument, "null scores or relevance array");
    std::size_t total_relevant = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(scores[i])) {
            std::ostringstream msg;
            msg << "score at index " << i << " is non-finite";
            throw_error(errc::not_finite, msg.str());
        }
        if (relevant[i]) ++total_relevant;
    }
    if (total_relevant == 0)
        throw_error(errc::domain,
                    "no relevant items; average precision is undefined");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });

    std::size_t hits = 0;
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        if (relevant[order[r]]) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(r + 1);
        }
    }
    return sum / static_cast<double>(total_relevant);
}

double average_precision(const std::vector<double>& scores,
                         const std::vector<unsigned char>& relevant) {
    if (scores.size() != relevant.size())
        throw_error(errc::dimension_mismatch,
                    "scores and relevance arrays differ in length");
    return average_precision(scores.data(), relevant.data(), scores.size());
}

std::vector<double> per_class_average_precision(const Matrix& scores,
                                                const Labels& y) {
    validate_matrix(scores, "score matrix");
    check_labels_match(scores, y);
    const std::size_t k = scores.cols();
    std::vector<double> ap(k, 0.0);
    parallel_for(k, [&](std::size_t cls) {
        std::vector<double> column(scores.rows());
        std::vector<unsigned char> relevant(scores.rows());
        std::size_t positives = 0;
        for (std::size_t i = 0; i < scores.rows(); ++i) {
            column[i] = scores(i, cls);
            relevant[i] =
                y[i] == static_cast<std::int64_t>(cls) ? 1 : 0;
            positives += relevant[i];
        }
        if (positives == 0) {
            std::ostringstream msg;
            msg << "class " << cls << " has no positive samples";
            throw_error(errc::domain, msg.str());
        }
        ap[cls] = average_precision(column.data(), relevant.data(),
                                    scores.rows());
    });
    return ap;
}

double mean_average_precision(const Matrix& scores, const Labels& y) {
    const auto ap = per_class_average_precision(scores, y);
    double sum = 0.0;
    for (double v : ap) sum += v;
    return sum / static_cast<double>(ap.size());
}

} // namespace rankkit
