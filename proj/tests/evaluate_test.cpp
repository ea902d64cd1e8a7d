#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/error.hpp"
#include "core/rng.hpp"
#include "evaluate/diagnostics.hpp"
#include "evaluate/metrics.hpp"
#include "normalize/normalize.hpp"

using rankkit::errc;
using rankkit::Labels;
using rankkit::Matrix;
using rankkit::Rng;

namespace {

errc code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const rankkit::error& e) {
        return e.code();
    }
    return static_cast<errc>(0);
}

// Order-free AP straight from the definition: an item's rank is the number
// of items at or above it (score above, or equal score with index not
// after). No sorting, so it shares nothing with the production code.
double ap_by_counting(const std::vector<double>& scores,
                      const std::vector<unsigned char>& relevant) {
    const std::size_t n = scores.size();
    double sum = 0.0;
    std::size_t total_relevant = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!relevant[i]) continue;
        ++total_relevant;
        std::size_t rank = 0, hits = 0;
        for (std::size_t j = 0; j < n; ++j) {
            const bool at_or_above =
                scores[j] > scores[i] || (scores[j] == scores[i] && j <= i);
            if (at_or_above) {
                ++rank;
                if (relevant[j]) ++hits;
            }
        }
        sum += static_cast<double>(hits) / static_cast<double>(rank);
    }
    return sum / static_cast<double>(total_relevant);
}

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i)
        m.data()[i] = rng.next_gaussian();
    return m;
}

} // namespace

TEST_CASE("average precision basics") {
    CHECK(rankkit::average_precision({0.9, 0.8, 0.7}, {1, 0, 1}) ==
          doctest::Approx(5.0 / 6.0).epsilon(1e-15));
    CHECK(rankkit::average_precision({0.9, 0.8, 0.7, 0.1}, {1, 1, 0, 0}) ==
          1.0);
    CHECK(rankkit::average_precision({0.5}, {1}) == 1.0);
    CHECK(code_of([] { rankkit::average_precision({0.1, 0.2}, {0, 0}); }) ==
          errc::domain);
    CHECK(code_of([] { rankkit::average_precision({}, {}); }) ==
          errc::invalid_argument);
    CHECK(code_of([] { rankkit::average_precision({0.1, 0.2}, {1}); }) ==
          errc::dimension_mismatch);
    CHECK(code_of([] {
              rankkit::average_precision({0.1, std::nan("")}, {1, 0});
          }) == errc::not_finite);
}

TEST_CASE("score ties break by ascending index") {
    // The relevant item is second among the tied pair, so it sits at rank 2.
    CHECK(rankkit::average_precision({1.0, 1.0}, {0, 1}) ==
          doctest::Approx(0.5).epsilon(1e-15));
    CHECK(rankkit::average_precision({1.0, 1.0}, {1, 0}) == 1.0);
}

TEST_CASE("average precision matches exhaustive counting for small n") {
    // Every label pattern and every score assignment from a small grid.
    const double grid[3] = {0.25, 0.5, 0.75};
    for (std::size_t n = 1; n <= 5; ++n) {
        std::vector<std::size_t> score_pick(n, 0);
        for (;;) {
            std::vector<double> scores(n);
            for (std::size_t i = 0; i < n; ++i) scores[i] = grid[score_pick[i]];
            for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
                std::vector<unsigned char> rel(n);
                for (std::size_t i = 0; i < n; ++i)
                    rel[i] = (mask >> i) & 1u;
                CHECK(rankkit::average_precision(scores, rel) ==
                      doctest::Approx(ap_by_counting(scores, rel))
                          .epsilon(1e-13));
            }
            std::size_t pos = 0;
            while (pos < n && ++score_pick[pos] == 3) score_pick[pos++] = 0;
            if (pos == n) break;
        }
    }
}

TEST_CASE("average precision ignores monotone score transforms") {
    Rng rng(50);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 12;
        std::vector<double> scores(n);
        std::vector<unsigned char> rel(n, 0);
        for (auto& s : scores) s = rng.next_gaussian();
        for (auto& r : rel) r = rng.next_below(2) ? 1 : 0;
        if (std::none_of(rel.begin(), rel.end(),
                         [](unsigned char r) { return r != 0; }))
            rel[0] = 1;
        const double base = rankkit::average_precision(scores, rel);

        std::vector<double> warped(n);
        for (std::size_t i = 0; i < n; ++i)
            warped[i] = std::exp(0.5 * scores[i]) + 3.0;
        CHECK(rankkit::average_precision(warped, rel) == base);
        for (std::size_t i = 0; i < n; ++i) warped[i] = scores[i] * 0.25 - 9.0;
        CHECK(rankkit::average_precision(warped, rel) == base);
    }
}

TEST_CASE("mean average precision") {
    SUBCASE("identity scores are perfect") {
        CHECK(rankkit::mean_average_precision(Matrix(2, 2, {1, 0, 0, 1}),
                                              {0, 1}) == 1.0);
    }
    SUBCASE("single class is trivially perfect") {
        CHECK(rankkit::mean_average_precision(Matrix(3, 1, {0.3, 0.1, 0.9}),
                                              {0, 0, 0}) == 1.0);
    }
    SUBCASE("per-class values average unweighted") {
        // Class 0 ranks its positive last among three; class 1 is perfect.
        const Matrix scores(3, 2, {0.1, 0.9, 0.2, 0.8, 0.3, 0.0});
        const Labels y = {0, 1, 1};
        const auto per_class =
            rankkit::per_class_average_precision(scores, y);
        REQUIRE(per_class.size() == 2);
        CHECK(rankkit::mean_average_precision(scores, y) ==
              doctest::Approx((per_class[0] + per_class[1]) / 2.0)
                  .epsilon(1e-15));
    }
    SUBCASE("class without positives is named") {
        try {
            rankkit::mean_average_precision(random_matrix(4, 3, 1),
                                            {0, 0, 1, 1});
            FAIL("expected domain error");
        } catch (const rankkit::error& e) {
            CHECK(e.code() == errc::domain);
            CHECK(std::string(e.what()).find("2") != std::string::npos);
        }
    }
    SUBCASE("column and label permutation invariance") {
        const Matrix scores = random_matrix(12, 4, 9);
        Labels y;
        for (std::size_t i = 0; i < 12; ++i)
            y.push_back(static_cast<std::int64_t>(i % 4));
        const double base = rankkit::mean_average_precision(scores, y);

        const std::size_t perm[4] = {2, 0, 3, 1}; // old class c becomes perm[c]
        Matrix shuffled(12, 4);
        Labels relabeled;
        for (std::size_t r = 0; r < 12; ++r)
            for (std::size_t c = 0; c < 4; ++c)
                shuffled(r, perm[c]) = scores(r, c);
        for (std::size_t i = 0; i < 12; ++i)
            relabeled.push_back(
                static_cast<std::int64_t>(perm[static_cast<std::size_t>(y[i])]));
        CHECK(rankkit::mean_average_precision(shuffled, relabeled) ==
              doctest::Approx(base).epsilon(1e-15));
    }
}

TEST_CASE("column standard deviations") {
    const Matrix m(2, 3, {5, -1, 0, 5, 1, 2});
    const auto profile = rankkit::column_std_profile(m);
    REQUIRE(profile.size() == 3);
    CHECK(profile[0] == 0.0);
    CHECK(profile[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(profile[2] == doctest::Approx(1.0).epsilon(1e-15));

    SUBCASE("rank-normalized columns hit the analytic value") {
        const Matrix data(4, 2, {0.3, 7.0, 1.2, -2.0, -4.0, 0.5, 9.9, 3.3});
        const Matrix ranked =
            rankkit::rank_normalize_exact(data, rankkit::TiePolicy::average);
        const auto stds = rankkit::column_std_profile(ranked);
        const double expected = std::sqrt((16.0 - 1.0) / 12.0) / 4.0;
        CHECK(expected == doctest::Approx(0.2795084971874737).epsilon(1e-15));
        for (double s : stds)
            CHECK(s == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("value histograms") {
    SUBCASE("two values, two bins") {
        const Matrix m(1, 2, {0.25, 0.75});
        const auto h = rankkit::value_histogram(m, 2, {{0.0, 1.0}});
        REQUIRE(h.counts.size() == 2);
        CHECK(h.counts[0] == 1);
        CHECK(h.counts[1] == 1);
        CHECK(h.total == 2);
        CHECK(h.bin_edges.front() == 0.0);
        CHECK(h.bin_edges.back() == 1.0);
    }
    SUBCASE("uniform grid fills bins evenly") {
        Matrix m(10, 10);
        for (std::size_t i = 0; i < 100; ++i)
            m.data()[i] = static_cast<double>(i) / 100.0;
        const auto h = rankkit::value_histogram(m, 10, {{0.0, 1.0}});
        for (std::uint64_t c : h.counts) CHECK(c == 10);
    }
    SUBCASE("upper edge lands in the last bin") {
        const Matrix m(1, 3, {0.0, 0.5, 1.0});
        const auto h = rankkit::value_histogram(m, 2, {{0.0, 1.0}});
        CHECK(h.counts[0] == 1);
        CHECK(h.counts[1] == 2);
    }
    SUBCASE("identical values collapse to a single point bin") {
        const Matrix m(2, 2, {3.5, 3.5, 3.5, 3.5});
        const auto h = rankkit::value_histogram(m, 7, std::nullopt);
        REQUIRE(h.bin_edges.size() == 2);
        CHECK(h.bin_edges[0] == 3.5);
        CHECK(h.bin_edges[1] == 3.5);
        REQUIRE(h.counts.size() == 1);
        CHECK(h.counts[0] == 4);
        CHECK(h.total == 4);
    }
    SUBCASE("explicit degenerate range is rejected") {
        const Matrix m(1, 2, {1.0, 2.0});
        CHECK(code_of([&] {
                  rankkit::value_histogram(m, 4, {{2.0, 2.0}});
              }) == errc::domain);
        CHECK(code_of([&] {
                  rankkit::value_histogram(m, 4, {{3.0, 2.0}});
              }) == errc::domain);
        CHECK(code_of([&] { rankkit::value_histogram(m, 0, std::nullopt); }) ==
              errc::invalid_argument);
    }
    SUBCASE("out-of-range values are not counted") {
        const Matrix m(1, 4, {-5.0, 0.25, 0.75, 5.0});
        const auto h = rankkit::value_histogram(m, 2, {{0.0, 1.0}});
        CHECK(h.total == 2);
        CHECK(h.counts[0] + h.counts[1] == h.total);
    }
    SUBCASE("auto range uses the data extremes") {
        const Matrix m = random_matrix(6, 6, 77);
        const auto h = rankkit::value_histogram(m, 12, std::nullopt);
        CHECK(h.total == 36);
        double lo = m.data()[0], hi = m.data()[0];
        for (std::size_t i = 1; i < m.size(); ++i) {
            lo = std::min(lo, m.data()[i]);
            hi = std::max(hi, m.data()[i]);
        }
        CHECK(h.bin_edges.front() == lo);
        CHECK(h.bin_edges.back() == hi);
    }
}

TEST_CASE("cosine similarity distributions") {
    SUBCASE("identical positives concentrate at one") {
        const Matrix m(3, 2, {1, 1, 1, 1, 1, 0});
        const Labels y = {0, 0, 1};
        const auto stats = rankkit::cosine_similarity_stats(m, y, 0, 4);
        // one pos-pos pair with cosine exactly 1 -> last bin
        CHECK(stats.pos_pos.total == 1);
        CHECK(stats.pos_pos.counts.back() == 1);
        CHECK(stats.pos_neg.total == 2);
        CHECK(stats.zero_norm_excluded == 0);
    }
    SUBCASE("orthogonal rows concentrate at zero") {
        const Matrix m(3, 2, {1, 0, 1, 0, 0, 1});
        const Labels y = {0, 0, 1};
        const auto stats = rankkit::cosine_similarity_stats(m, y, 0, 2);
        // cosine 0 falls in the upper half-bin of [-1, 1]
        CHECK(stats.pos_neg.counts[0] == 0);
        CHECK(stats.pos_neg.counts[1] == 2);
    }
    SUBCASE("zero-norm rows are excluded and reported") {
        const Matrix m(4, 2, {1, 0, 0, 0, 1, 1, 0, 1});
        const Labels y = {0, 0, 0, 1};
        const auto stats = rankkit::cosine_similarity_stats(m, y, 0, 4);
        CHECK(stats.zero_norm_excluded == 1);
        CHECK(stats.pos_pos.total == 1); // the two surviving positives
    }
    SUBCASE("insufficient positives rejected") {
        const Matrix m(2, 2, {1, 0, 0, 1});
        CHECK(code_of([&] {
                  rankkit::cosine_similarity_stats(m, {0, 1}, 0, 4);
              }) == errc::domain);
        // Zero-norm exclusion can push a class below the minimum.
        const Matrix z(3, 2, {1, 0, 0, 0, 0, 1});
        CHECK(code_of([&] {
                  rankkit::cosine_similarity_stats(z, {0, 0, 1}, 0, 4);
              }) == errc::domain);
    }
    SUBCASE("rank normalization makes every cosine positive") {
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            const Matrix m = random_matrix(20, 16, seed);
            const Matrix ranked = rankkit::rank_normalize_exact(
                m, rankkit::TiePolicy::average);
            for (std::size_t a = 0; a < ranked.rows(); ++a) {
                for (std::size_t b = a + 1; b < ranked.rows(); ++b) {
                    double dot = 0;
                    for (std::size_t c = 0; c < ranked.cols(); ++c)
                        dot += ranked(a, c) * ranked(b, c);
                    CHECK(dot > 0.0); // norms are positive, the dot decides
                }
            }
            Labels y;
            for (std::size_t i = 0; i < 20; ++i)
                y.push_back(static_cast<std::int64_t>(i % 2));
            const auto stats =
                rankkit::cosine_similarity_stats(ranked, y, 0, 4);
            CHECK(stats.pos_pos.counts[0] == 0); // [-1,-0.5): empty
            CHECK(stats.pos_pos.counts[1] == 0); // [-0.5,0): empty
            CHECK(stats.pos_neg.counts[0] == 0);
            CHECK(stats.pos_neg.counts[1] == 0);
        }
    }
}

TEST_CASE("stats report document") {
    const Matrix m = random_matrix(12, 5, 33);
    Labels y;
    for (std::size_t i = 0; i < 12; ++i)
        y.push_back(static_cast<std::int64_t>(i % 3));

    const auto doc = rankkit::stats_report(m, &y, -1, 8);
    CHECK(doc.at("shape").at("rows").get<std::size_t>() == 12);
    CHECK(doc.at("shape").at("cols").get<std::size_t>() == 5);
    CHECK(doc.at("value_histogram").at("counts").size() == 8);
    CHECK(doc.at("std_profile").size() == 5);
    CHECK(doc.at("cosine").size() == 3); // every class is eligible

    const auto one = rankkit::stats_report(m, &y, 1, 8);
    CHECK(one.at("cosine").size() == 1);
    CHECK(one.at("cosine")[0].at("class").get<int>() == 1);

    const auto unlabeled = rankkit::stats_report(m, nullptr, -1, 8);
    CHECK_FALSE(unlabeled.contains("cosine"));

    SUBCASE("csv export writes the documented files") {
        namespace fs = std::filesystem;
        const fs::path dir = fs::temp_directory_path() / "rankkit_stats_csv";
        fs::remove_all(dir);
        rankkit::write_stats_csv(m, &y, 0, 8, dir.string());
        CHECK(fs::exists(dir / "value_histogram.csv"));
        CHECK(fs::exists(dir / "std_profile.csv"));
        CHECK(fs::exists(dir / "cosine_class0_pos_pos.csv"));
        CHECK(fs::exists(dir / "cosine_class0_pos_neg.csv"));

        std::ifstream in(dir / "value_histogram.csv");
        std::string header;
        std::getline(in, header);
        CHECK(header == "bin_lo,bin_hi,count");
        fs::remove_all(dir);
    }
}
