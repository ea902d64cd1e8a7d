#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/rng.hpp"
#include "normalize/normalize.hpp"
#include "normalize/pipeline.hpp"

using rankkit::errc;
using rankkit::Matrix;
using rankkit::Rng;
using rankkit::TiePolicy;

namespace {

errc code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const rankkit::error& e) {
        return e.code();
    }
    return static_cast<errc>(0);
}

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i)
        m.data()[i] = rng.next_gaussian() * 2.0;
    return m;
}

bool has_column_ties(const Matrix& m) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
        std::set<double> values;
        for (std::size_t r = 0; r < m.rows(); ++r) values.insert(m(r, c));
        if (values.size() != m.rows()) return true;
    }
    return false;
}

// Ascending positions of a column's values; equal positions mean equal rank.
std::vector<std::size_t> column_order(const Matrix& m, std::size_t col) {
    std::vector<std::size_t> idx(m.rows());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return m(a, col) < m(b, col);
    });
    return idx;
}

} // namespace

TEST_CASE("l2 normalization") {
    const Matrix m(3, 2, {3, 4, 0, 0, 1, 0});
    const Matrix out = rankkit::l2_normalize(m);
    CHECK(out(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(out(0, 1) == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(out(1, 0) == 0.0); // zero rows pass through
    CHECK(out(1, 1) == 0.0);
    CHECK(out(2, 0) == 1.0); // unit rows stay put
    CHECK(out(2, 1) == 0.0);

    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const Matrix x = random_matrix(20, 7, seed);
        const Matrix n = rankkit::l2_normalize(x);
        for (std::size_t r = 0; r < n.rows(); ++r) {
            double sum_sq = 0;
            for (std::size_t c = 0; c < n.cols(); ++c)
                sum_sq += n(r, c) * n(r, c);
            CHECK(sum_sq == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("power normalization") {
    const Matrix m(1, 3, {4, -9, 0});
    const Matrix half = rankkit::power_normalize(m, 0.5);
    CHECK(half(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(half(0, 1) == doctest::Approx(-3.0).epsilon(1e-15));
    CHECK(half(0, 2) == 0.0);

    SUBCASE("alpha 1 is the bitwise identity") {
        const Matrix x = random_matrix(13, 9, 4);
        CHECK(rankkit::power_normalize(x, 1.0) == x);
    }
    SUBCASE("alpha 0 is the sign step with 0 fixed") {
        const Matrix x(1, 3, {5, -2, 0});
        const Matrix out = rankkit::power_normalize(x, 0.0);
        CHECK(out(0, 0) == 1.0);
        CHECK(out(0, 1) == -1.0);
        CHECK(out(0, 2) == 0.0);
    }
    SUBCASE("sign and zero pattern preserved for every alpha") {
        const Matrix x = random_matrix(10, 10, 5);
        for (double alpha : {0.0, 0.17, 0.5, 0.99, 1.0}) {
            const Matrix out = rankkit::power_normalize(x, alpha);
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double a = x.data()[i], b = out.data()[i];
                CHECK(((a > 0 && b > 0) || (a < 0 && b < 0) ||
                       (a == 0 && b == 0)));
            }
        }
    }
    SUBCASE("exponent outside [0,1] rejected") {
        CHECK(code_of([&] { rankkit::power_normalize(m, -0.1); }) ==
              errc::domain);
        CHECK(code_of([&] { rankkit::power_normalize(m, 1.5); }) ==
              errc::domain);
    }
}

TEST_CASE("exact rank normalization") {
    const Matrix col(3, 1, {3.0, -1.0, 2.0});
    const Matrix ranked = rankkit::rank_normalize_exact(col, TiePolicy::average);
    CHECK(ranked(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(ranked(1, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(ranked(2, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

    const Matrix single(1, 1, {7.3});
    CHECK(rankkit::rank_normalize_exact(single, TiePolicy::average)(0, 0) ==
          1.0);
}

TEST_CASE("tie policies") {
    const Matrix col(3, 1, {1.0, 1.0, 2.0});

    const Matrix avg = rankkit::rank_normalize_exact(col, TiePolicy::average);
    CHECK(avg(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(avg(1, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(avg(2, 0) == doctest::Approx(1.0).epsilon(1e-15));

    const Matrix lo = rankkit::rank_normalize_exact(col, TiePolicy::min);
    CHECK(lo(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(lo(1, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    const Matrix hi = rankkit::rank_normalize_exact(col, TiePolicy::max);
    CHECK(hi(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(hi(1, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

    const Matrix st =
        rankkit::rank_normalize_exact(col, TiePolicy::stable_order);
    CHECK(st(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(st(1, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(st(2, 0) == doctest::Approx(1.0).epsilon(1e-15));

    CHECK(rankkit::parse_tie_policy("average") == TiePolicy::average);
    CHECK(rankkit::parse_tie_policy("stable_order") == TiePolicy::stable_order);
    CHECK(code_of([] { rankkit::parse_tie_policy("median"); }) ==
          errc::invalid_argument);
    CHECK(std::string(rankkit::tie_policy_name(TiePolicy::max)) == "max");
}

TEST_CASE("rank columns are independent and permutation-equivariant") {
    const Matrix m = random_matrix(15, 4, 77);
    REQUIRE_FALSE(has_column_ties(m));
    const Matrix ranked = rankkit::rank_normalize_exact(m, TiePolicy::average);

    // Column c of the result only depends on column c of the input.
    for (std::size_t c = 0; c < m.cols(); ++c) {
        Matrix col(m.rows(), 1);
        for (std::size_t r = 0; r < m.rows(); ++r) col(r, 0) = m(r, c);
        const Matrix rc = rankkit::rank_normalize_exact(col, TiePolicy::average);
        for (std::size_t r = 0; r < m.rows(); ++r)
            CHECK(rc(r, 0) == ranked(r, c));
    }

    // Reversing the rows reverses the output rows, bitwise.
    Matrix rev(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c)
            rev(r, c) = m(m.rows() - 1 - r, c);
    const Matrix ranked_rev =
        rankkit::rank_normalize_exact(rev, TiePolicy::average);
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c)
            CHECK(ranked_rev(r, c) == ranked(m.rows() - 1 - r, c));
}

TEST_CASE("rank output is a uniform grid per no-ties column") {
    const std::size_t n = 40;
    const Matrix m = random_matrix(n, 3, 31);
    REQUIRE_FALSE(has_column_ties(m));
    const Matrix ranked = rankkit::rank_normalize_exact(m, TiePolicy::average);
    for (std::size_t c = 0; c < m.cols(); ++c) {
        std::vector<double> values(n);
        for (std::size_t r = 0; r < n; ++r) values[r] = ranked(r, c);
        std::sort(values.begin(), values.end());
        for (std::size_t r = 0; r < n; ++r)
            CHECK(values[r] ==
                  doctest::Approx(double(r + 1) / double(n)).epsilon(1e-15));
    }
}

TEST_CASE("rank normalization is invariant under monotone transforms") {
    for (std::uint64_t seed : {10u, 11u, 12u}) {
        const Matrix m = random_matrix(25, 6, seed);
        const Matrix base = rankkit::rank_normalize_exact(m, TiePolicy::average);

        Matrix warped(m.rows(), m.cols());
        Rng rng(seed + 1000);
        for (std::size_t c = 0; c < m.cols(); ++c) {
            const double scale = 0.5 + rng.next_double() * 4.0;
            const double shift = rng.next_gaussian();
            const int kind = static_cast<int>(rng.next_below(3));
            for (std::size_t r = 0; r < m.rows(); ++r) {
                const double z = m(r, c) * scale + shift;
                warped(r, c) = kind == 0   ? z
                               : kind == 1 ? std::exp(z * 0.3)
                                           : z * z * z;
            }
        }
        CHECK(rankkit::rank_normalize_exact(warped, TiePolicy::average) ==
              base);
        // Idempotence: ranks of ranks are the same ranks.
        CHECK(rankkit::rank_normalize_exact(base, TiePolicy::average) == base);
    }
}

TEST_CASE("rank reference fitting") {
    const Matrix m = random_matrix(12, 5, 21);

    SUBCASE("deterministic in the seed") {
        const auto a = rankkit::fit_rank_reference(m, 4, 9);
        const auto b = rankkit::fit_rank_reference(m, 4, 9);
        CHECK(a.seeds() == b.seeds());
        const auto c = rankkit::fit_rank_reference(m, 4, 10);
        CHECK_FALSE(c.seeds() == a.seeds());
    }
    SUBCASE("seed vectors are whole rows") {
        const auto ref = rankkit::fit_rank_reference(Matrix(3, 2, {1, 10, 2, 20, 3, 30}), 1, 5);
        // With one seed the (sorted) seed matrix is one of the input rows.
        const double v0 = ref.seeds()(0, 0);
        const double v1 = ref.seeds()(0, 1);
        CHECK(v1 == doctest::Approx(v0 * 10).epsilon(1e-15));
    }
    SUBCASE("columns sorted ascending") {
        const auto ref = rankkit::fit_rank_reference(m, 12, 3);
        for (std::size_t c = 0; c < ref.dims(); ++c)
            for (std::size_t r = 1; r < ref.subset_size(); ++r)
                CHECK(ref.seeds()(r - 1, c) <= ref.seeds()(r, c));
    }
    SUBCASE("subset size bounds") {
        CHECK(code_of([&] { rankkit::fit_rank_reference(m, 0, 1); }) ==
              errc::invalid_argument);
        CHECK(code_of([&] { rankkit::fit_rank_reference(m, 13, 1); }) ==
              errc::invalid_argument);
    }
}

TEST_CASE("approximate rank normalization") {
    SUBCASE("single seed binarizes") {
        const rankkit::RankReference ref(Matrix(1, 1, {0.0}), 0);
        const Matrix m(3, 1, {-1.0, 0.0, 2.0});
        const Matrix out = rankkit::rank_normalize_approx(m, ref);
        CHECK(out(0, 0) == 0.0);
        CHECK(out(1, 0) == 0.0); // strict less-than: 0 is not below 0
        CHECK(out(2, 0) == 1.0);
    }
    SUBCASE("counts strictly-below seeds") {
        const rankkit::RankReference ref(Matrix(3, 1, {-1.0, 0.0, 2.0}), 0);
        const Matrix m(3, 1, {1.0, -5.0, 3.0});
        const Matrix out = rankkit::rank_normalize_approx(m, ref);
        CHECK(out(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
        CHECK(out(1, 0) == 0.0);
        CHECK(out(2, 0) == 1.0);
    }
    SUBCASE("full-subset reference reproduces exact rank order") {
        const Matrix m = random_matrix(18, 4, 55);
        REQUIRE_FALSE(has_column_ties(m));
        const auto ref = rankkit::fit_rank_reference(m, m.rows(), 7);
        const Matrix approx = rankkit::rank_normalize_approx(m, ref);
        const Matrix exact =
            rankkit::rank_normalize_exact(m, TiePolicy::average);
        const double inv_n = 1.0 / static_cast<double>(m.rows());
        for (std::size_t c = 0; c < m.cols(); ++c) {
            CHECK(column_order(approx, c) == column_order(exact, c));
            for (std::size_t r = 0; r < m.rows(); ++r)
                CHECK(approx(r, c) ==
                      doctest::Approx(exact(r, c) - inv_n).epsilon(1e-12));
        }
    }
    SUBCASE("outputs lie in [0,1] and are monotone in the input") {
        const Matrix data = random_matrix(30, 3, 60);
        const auto ref = rankkit::fit_rank_reference(data, 10, 2);
        const Matrix probes = random_matrix(50, 3, 61);
        const Matrix out = rankkit::rank_normalize_approx(probes, ref);
        for (std::size_t c = 0; c < probes.cols(); ++c) {
            for (std::size_t a = 0; a < probes.rows(); ++a) {
                CHECK(out(a, c) >= 0.0);
                CHECK(out(a, c) <= 1.0);
                for (std::size_t b = 0; b < probes.rows(); ++b)
                    if (probes(a, c) < probes(b, c))
                        CHECK(out(a, c) <= out(b, c));
            }
        }
    }
    SUBCASE("dimension mismatch rejected") {
        const rankkit::RankReference ref(Matrix(1, 2, {0.0, 0.0}), 0);
        CHECK(code_of([&] {
                  rankkit::rank_normalize_approx(Matrix(1, 3, {1, 2, 3}), ref);
              }) == errc::dimension_mismatch);
    }
}

TEST_CASE("reference save and load round-trip") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "rankkit_ref_io";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string path = (dir / "ref.fmat").string();

    const Matrix m = random_matrix(9, 3, 100);
    const auto ref = rankkit::fit_rank_reference(m, 5, 17);
    rankkit::save_rank_reference(ref, path);
    const auto loaded = rankkit::load_rank_reference(path);
    CHECK(loaded.seeds() == ref.seeds());
    CHECK(loaded.subset_size() == 5);
    CHECK(loaded.seed() == 17);

    // A sidecar describing a different artifact must be rejected.
    {
        std::ofstream out(path + ".json", std::ios::trunc);
        out << "{\"kind\":\"something_else\"}\n";
    }
    CHECK(code_of([&] { rankkit::load_rank_reference(path); }) ==
          errc::format);
    fs::remove_all(dir);
}

TEST_CASE("within-group rank normalization") {
    const Matrix g1(2, 1, {5.0, 1.0});
    const Matrix g2(2, 1, {2.0, 9.0});
    const auto out =
        rankkit::within_group_rank_normalize({&g1, &g2}, TiePolicy::average);
    REQUIRE(out.size() == 2);
    CHECK(out[0](0, 0) == 1.0);
    CHECK(out[0](1, 0) == 0.5);
    CHECK(out[1](0, 0) == 0.5);
    CHECK(out[1](1, 0) == 1.0);

    SUBCASE("single group equals plain ranking") {
        const Matrix m = random_matrix(8, 3, 42);
        const auto single =
            rankkit::within_group_rank_normalize({&m}, TiePolicy::average);
        CHECK(single[0] ==
              rankkit::rank_normalize_exact(m, TiePolicy::average));
    }
    SUBCASE("one-row group maps to all ones") {
        const Matrix one(1, 4, {3, -1, 0, 9});
        const auto single =
            rankkit::within_group_rank_normalize({&one}, TiePolicy::average);
        for (std::size_t c = 0; c < 4; ++c) CHECK(single[0](0, c) == 1.0);
    }
    SUBCASE("mismatched widths rejected") {
        const Matrix wide(2, 2, {1, 2, 3, 4});
        CHECK(code_of([&] {
                  rankkit::within_group_rank_normalize({&g1, &wide},
                                                       TiePolicy::average);
              }) == errc::dimension_mismatch);
    }
}

TEST_CASE("pipeline parsing and serialization") {
    const std::string text =
        R"({"steps":[{"rank_exact":{"tie":"average"}},{"l2":{}}]})";
    const rankkit::Pipeline p = rankkit::parse_pipeline(text);
    REQUIRE(p.steps.size() == 2);
    CHECK(p.steps[0].kind == rankkit::PipelineStep::Kind::rank_exact);
    CHECK(p.steps[0].tie == TiePolicy::average);
    CHECK(p.steps[1].kind == rankkit::PipelineStep::Kind::l2);

    // Serialize-then-parse reproduces the pipeline.
    const std::string canon = rankkit::pipeline_to_json(p);
    const rankkit::Pipeline back = rankkit::parse_pipeline(canon);
    CHECK(back.steps.size() == p.steps.size());
    CHECK(back.steps[0].kind == p.steps[0].kind);
    CHECK(back.steps[0].tie == p.steps[0].tie);
    CHECK(rankkit::pipeline_to_json(back) == canon);

    SUBCASE("power defaults and bounds") {
        const auto dp = rankkit::parse_pipeline(R"({"steps":[{"power":{}}]})");
        CHECK(dp.steps[0].alpha == 0.5);
        CHECK(code_of([] {
                  rankkit::parse_pipeline(
                      R"({"steps":[{"power":{"alpha":1.5}}]})");
              }) == errc::format);
    }
    SUBCASE("rank_approx fit parameters") {
        const auto fit = rankkit::parse_pipeline(
            R"({"steps":[{"rank_approx":{"s":5,"seed":9}}]})");
        CHECK(fit.steps[0].fit_from_input);
        CHECK(fit.steps[0].subset_size == 5);
        CHECK(fit.steps[0].seed == 9);
        const auto supplied =
            rankkit::parse_pipeline(R"({"steps":[{"rank_approx":{}}]})");
        CHECK_FALSE(supplied.steps[0].fit_from_input);
        // s without seed (and vice versa) is ambiguous, so it is rejected.
        CHECK(code_of([] {
                  rankkit::parse_pipeline(
                      R"({"steps":[{"rank_approx":{"s":5}}]})");
              }) == errc::format);
    }
    SUBCASE("malformed documents rejected") {
        for (const char* bad : {
                 "not json",
                 "{}",
                 R"({"steps":[]})",
                 R"({"steps":[{}]})",
                 R"({"steps":[{"l2":{},"power":{}}]})",
                 R"({"steps":[{"frobnicate":{}}]})",
                 R"({"steps":[{"l2":{"mode":"fast"}}]})",
                 R"({"steps":[{"rank_exact":{"tie":"median"}}]})",
                 R"({"steps":[{"l2":{}}],"extra":1})",
             }) {
            CHECK(code_of([&] { rankkit::parse_pipeline(bad); }) ==
                  errc::format);
        }
    }
}

TEST_CASE("pipeline application") {
    SUBCASE("power(1.0) alone is the identity") {
        const Matrix m = random_matrix(6, 5, 8);
        const auto p =
            rankkit::parse_pipeline(R"({"steps":[{"power":{"alpha":1.0}}]})");
        CHECK(rankkit::apply_pipeline(m, p) == m);
    }
    SUBCASE("power then l2, by hand") {
        const Matrix m(2, 2, {4, 0, 1, 0});
        const auto p = rankkit::parse_pipeline(
            R"({"steps":[{"power":{"alpha":0.5}},{"l2":{}}]})");
        const Matrix out = rankkit::apply_pipeline(m, p);
        CHECK(out(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(out(0, 1) == 0.0);
        CHECK(out(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(out(1, 1) == 0.0);
    }
    SUBCASE("rank then l2 gives positive unit rows") {
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            const Matrix m = random_matrix(10, 8, seed);
            REQUIRE_FALSE(has_column_ties(m));
            const auto p = rankkit::parse_pipeline(
                R"({"steps":[{"rank_exact":{"tie":"average"}},{"l2":{}}]})");
            const Matrix out = rankkit::apply_pipeline(m, p);
            for (std::size_t r = 0; r < out.rows(); ++r) {
                double sum_sq = 0;
                for (std::size_t c = 0; c < out.cols(); ++c) {
                    CHECK(out(r, c) > 0.0);
                    sum_sq += out(r, c) * out(r, c);
                }
                CHECK(sum_sq == doctest::Approx(1.0).epsilon(1e-12));
            }
        }
    }
    SUBCASE("fit-mode rank_approx exposes its fitted reference") {
        const Matrix train = random_matrix(20, 4, 90);
        const Matrix test = random_matrix(10, 4, 91);
        const auto p = rankkit::parse_pipeline(
            R"({"steps":[{"rank_approx":{"s":6,"seed":3}},{"l2":{}}]})");
        std::optional<rankkit::RankReference> fitted;
        const Matrix train_out = rankkit::apply_pipeline(train, p, nullptr,
                                                         &fitted);
        REQUIRE(fitted.has_value());
        CHECK(fitted->subset_size() == 6);

        // The captured reference reproduces the train-side transform on the
        // test side through the supplied-reference path.
        const auto supplied = rankkit::parse_pipeline(
            R"({"steps":[{"rank_approx":{}},{"l2":{}}]})");
        const Matrix test_out =
            rankkit::apply_pipeline(test, supplied, &*fitted);
        const Matrix direct = rankkit::l2_normalize(
            rankkit::rank_normalize_approx(test, *fitted));
        CHECK(test_out == direct);
    }
    SUBCASE("supplied-mode rank_approx requires a reference") {
        const Matrix m = random_matrix(4, 2, 14);
        const auto p =
            rankkit::parse_pipeline(R"({"steps":[{"rank_approx":{}}]})");
        CHECK(code_of([&] { rankkit::apply_pipeline(m, p); }) ==
              errc::invalid_argument);
    }
    SUBCASE("within_group_rank on one matrix equals rank_exact") {
        const Matrix m = random_matrix(9, 4, 15);
        const auto p = rankkit::parse_pipeline(
            R"({"steps":[{"within_group_rank":{"tie":"average"}}]})");
        CHECK(rankkit::apply_pipeline(m, p) ==
              rankkit::rank_normalize_exact(m, TiePolicy::average));
    }
}

TEST_CASE("rank operations ignore the worker count") {
    const Matrix m = random_matrix(40, 23, 5005);
    rankkit::set_threads(1);
    const Matrix base_rank = rankkit::rank_normalize_exact(m, TiePolicy::average);
    const Matrix base_l2 = rankkit::l2_normalize(m);
    const auto base_ref = rankkit::fit_rank_reference(m, 11, 3);
    const Matrix base_approx = rankkit::rank_normalize_approx(m, base_ref);
    for (int t : {2, 5, 16}) {
        rankkit::set_threads(t);
        CHECK(rankkit::rank_normalize_exact(m, TiePolicy::average) ==
              base_rank);
        CHECK(rankkit::l2_normalize(m) == base_l2);
        const auto ref = rankkit::fit_rank_reference(m, 11, 3);
        CHECK(ref.seeds() == base_ref.seeds());
        CHECK(rankkit::rank_normalize_approx(m, ref) == base_approx);
    }
    rankkit::set_threads(1);
}
