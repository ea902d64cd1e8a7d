#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "core/error.hpp"
#include "synth/generator.hpp"

using rankkit::errc;
using rankkit::Labels;
using rankkit::Matrix;
using rankkit::SynthParams;

namespace {

errc code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const rankkit::error& e) {
        return e.code();
    }
    return static_cast<errc>(0);
}

std::size_t count_zeros(const Matrix& m) {
    std::size_t zeros = 0;
    for (std::size_t i = 0; i < m.size(); ++i)
        if (m.data()[i] == 0.0) ++zeros;
    return zeros;
}

} // namespace

TEST_CASE("parameter validation") {
    SynthParams p;
    p.p_sparse = 1.0;
    CHECK(code_of([&] { rankkit::validate_synth_params(p); }) == errc::domain);
    p = SynthParams{};
    p.burst_dims = p.dims + 1;
    CHECK(code_of([&] { rankkit::validate_synth_params(p); }) ==
          errc::invalid_argument);
    p = SynthParams{};
    p.noise_sigma = 0.0;
    CHECK(code_of([&] { rankkit::validate_synth_params(p); }) == errc::domain);
    p = SynthParams{};
    p.classes = 0;
    CHECK(code_of([&] { rankkit::validate_synth_params(p); }) ==
          errc::invalid_argument);
    // burst_scale 0 is the documented way to switch bursts off
    p = SynthParams{};
    p.burst_scale = 0.0;
    CHECK_NOTHROW(rankkit::validate_synth_params(p));
}

TEST_CASE("generation is deterministic and class-major") {
    SynthParams p;
    p.n_per_class = 5;
    p.classes = 3;
    p.dims = 32;
    p.seed = 42;
    const auto [x1, y1] = rankkit::generate_sparse_bursty(p);
    const auto [x2, y2] = rankkit::generate_sparse_bursty(p);
    CHECK(x1 == x2);
    CHECK(y1 == y2);
    CHECK(x1.rows() == 15);
    CHECK(x1.cols() == 32);
    REQUIRE(y1.size() == 15);
    for (std::size_t i = 0; i < y1.size(); ++i)
        CHECK(y1[i] == static_cast<std::int64_t>(i / 5));

    p.seed = 43;
    const auto [x3, y3] = rankkit::generate_sparse_bursty(p);
    CHECK_FALSE(x3 == x1);
    CHECK(y3 == y1);
}

TEST_CASE("zero fraction tracks p_sparse") {
    SynthParams p;
    p.n_per_class = 25;
    p.classes = 4;
    p.dims = 64;
    p.p_sparse = 0.7;
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        p.seed = seed;
        const auto [x, y] = rankkit::generate_sparse_bursty(p);
        const double n = static_cast<double>(x.size());
        const double want = 0.7 * n;
        const double sigma = std::sqrt(n * 0.7 * 0.3);
        CHECK(std::abs(static_cast<double>(count_zeros(x)) - want) <=
              3.0 * sigma);
    }
}

TEST_CASE("near-total sparsity leaves almost everything zero") {
    SynthParams p;
    p.n_per_class = 5;
    p.classes = 2;
    p.dims = 10;
    p.p_sparse = 0.999;
    p.burst_dims = 2;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        p.seed = seed;
        const auto [x, y] = rankkit::generate_sparse_bursty(p);
        CHECK(count_zeros(x) >= 85); // out of 100
    }
}

TEST_CASE("bursts off gives plain gaussian columns") {
    SynthParams p;
    p.n_per_class = 400;
    p.classes = 8;
    p.dims = 16;
    p.p_sparse = 0.0;
    p.burst_scale = 0.0;
    p.noise_sigma = 0.25;
    p.seed = 7;
    const auto [x, y] = rankkit::generate_sparse_bursty(p);
    for (std::size_t c = 0; c < x.cols(); ++c) {
        // Class-conditional std is noise_sigma; the class means add
        // cross-class variance, so measure within one class block. The
        // sampling std of a 400-sample std estimate is about sigma/sqrt(800),
        // so +-15% leaves a wide margin.
        double sum = 0, sq = 0;
        for (std::size_t r = 0; r < p.n_per_class; ++r) sum += x(r, c);
        const double mean = sum / static_cast<double>(p.n_per_class);
        for (std::size_t r = 0; r < p.n_per_class; ++r) {
            const double d = x(r, c) - mean;
            sq += d * d;
        }
        const double std_dev =
            std::sqrt(sq / static_cast<double>(p.n_per_class));
        CHECK(std_dev > 0.25 * 0.85);
        CHECK(std_dev < 0.25 * 1.15);
    }
}

TEST_CASE("bursty dimensions have heavy tails") {
    SynthParams p;
    p.n_per_class = 60;
    p.classes = 4;
    p.dims = 64;
    p.p_sparse = 0.5;
    p.burst_dims = 8;
    p.burst_scale = 2.5;
    p.seed = 3;
    const auto [x, y] = rankkit::generate_sparse_bursty(p);

    // Kurtosis of the nonzero entries; gaussian data sits at 3.
    double sum = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x.data()[i] != 0.0) {
            sum += x.data()[i];
            ++n;
        }
    REQUIRE(n > 100);
    const double mean = sum / static_cast<double>(n);
    double m2 = 0, m4 = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x.data()[i] != 0.0) {
            const double d = x.data()[i] - mean;
            m2 += d * d;
            m4 += d * d * d * d;
        }
    m2 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    CHECK(m4 / (m2 * m2) > 3.0);
}

TEST_CASE("stratified split") {
    SynthParams p;
    p.n_per_class = 10;
    p.classes = 3;
    p.dims = 8;
    p.burst_dims = 2;
    p.seed = 11;
    const auto [x, y] = rankkit::generate_sparse_bursty(p);

    SUBCASE("half and half per class") {
        const auto split = rankkit::benchmark_split(x, y, 0.5, 99);
        CHECK(split.train_x.rows() == 15);
        CHECK(split.test_x.rows() == 15);
        for (std::int64_t cls = 0; cls < 3; ++cls) {
            const auto count = [cls](const Labels& labels) {
                std::size_t c = 0;
                for (auto l : labels)
                    if (l == cls) ++c;
                return c;
            };
            CHECK(count(split.train_y) == 5);
            CHECK(count(split.test_y) == 5);
        }
    }
    SUBCASE("deterministic in the seed") {
        const auto a = rankkit::benchmark_split(x, y, 0.4, 7);
        const auto b = rankkit::benchmark_split(x, y, 0.4, 7);
        CHECK(a.train_x == b.train_x);
        CHECK(a.test_x == b.test_x);
        CHECK(a.train_y == b.train_y);
        const auto c = rankkit::benchmark_split(x, y, 0.4, 8);
        CHECK_FALSE(c.train_x == a.train_x);
    }
    SUBCASE("rows keep their original order") {
        const auto split = rankkit::benchmark_split(x, y, 0.5, 99);
        // Train rows must appear in the same order as in the source; verify
        // by walking the source once.
        std::size_t cursor = 0;
        for (std::size_t r = 0; r < x.rows() && cursor < split.train_x.rows();
             ++r) {
            bool same = true;
            for (std::size_t c = 0; c < x.cols(); ++c)
                if (x(r, c) != split.train_x(cursor, c)) same = false;
            if (same) ++cursor;
        }
        CHECK(cursor == split.train_x.rows());
    }
    SUBCASE("extreme fractions still keep one row per side") {
        const auto tiny = rankkit::benchmark_split(x, y, 0.01, 5);
        const auto huge = rankkit::benchmark_split(x, y, 0.99, 5);
        for (std::int64_t cls = 0; cls < 3; ++cls) {
            auto count = [cls](const Labels& labels) {
                std::size_t c = 0;
                for (auto l : labels)
                    if (l == cls) ++c;
                return c;
            };
            CHECK(count(tiny.train_y) == 1);
            CHECK(count(huge.test_y) == 1);
        }
    }
    SUBCASE("rejects what cannot stratify") {
        CHECK(code_of([&] { rankkit::benchmark_split(x, y, 0.0, 1); }) ==
              errc::domain);
        CHECK(code_of([&] { rankkit::benchmark_split(x, y, 1.0, 1); }) ==
              errc::domain);
        const Matrix two(2, 2, {1, 2, 3, 4});
        CHECK(code_of([&] {
                  rankkit::benchmark_split(two, {0, 1}, 0.5, 1);
              }) == errc::invalid_argument);
    }
}
