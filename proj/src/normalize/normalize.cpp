#include "normalize/normalize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "core/error.hpp"
#include "core/io.hpp"
#include "core/parallel.hpp"
#include "core/rng.hpp"

namespace rankkit {

TiePolicy parse_tie_policy(const std::string& name) {
    if (name == "average") return TiePolicy::average;
    if (name == "min") return TiePolicy::min;
    if (name == "max") return TiePolicy::max;
    if (name == "stable_order") return TiePolicy::stable_order;
    throw_error(errc::invalid_argument,
                "unknown tie policy '" + name +
                    "' (average, min, max or stable_order)");
}

const char* tie_policy_name(TiePolicy tie) {
    switch (tie) {
        case TiePolicy::average: return "average";
        case TiePolicy::min: return "min";
        case TiePolicy::max: return "max";
        case TiePolicy::stable_order: return "stable_order";
    }
    throw_error(errc::internal, "corrupt tie policy value");
}

Matrix l2_normalize(const Matrix& m) {
    validate_matrix(m);
    Matrix out(m.rows(), m.cols());
    parallel_chunks(m.rows(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            const double* src = m.row(r);
            double* dst = out.row(r);
            double sum_sq = 0.0;
            for (std::size_t c = 0; c < m.cols(); ++c)
                sum_sq += src[c] * src[c];
            if (sum_sq == 0.0) {
                std::copy(src, src + m.cols(), dst);
                continue;
            }
            const double inv_norm = 1.0 / std::sqrt(sum_sq);
            for (std::size_t c = 0; c < m.cols(); ++c)
                dst[c] = src[c] * inv_norm;
        }
    });
    return out;
}

Matrix power_normalize(const Matrix& m, double alpha) {
    validate_matrix(m);
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        std::ostringstream msg;
        msg << "power exponent must lie in [0, 1], got " << alpha;
        throw_error(errc::domain, msg.str());
    }
    Matrix out(m.rows(), m.cols());
    if (alpha == 1.0) { // exact identity, pow() may not round-trip
        std::copy(m.data(), m.data() + m.size(), out.data());
        return out;
    }
    parallel_chunks(m.size(), [&](std::size_t begin, std::size_t end) {
        const double* src = m.data();
        double* dst = out.data();
        for (std::size_t i = begin; i < end; ++i) {
            const double z = src[i];
            if (z == 0.0) {
                dst[i] = 0.0; // 0^0 would be 1; zeros must stay zero
            } else if (alpha == 0.0) {
                dst[i] = z > 0.0 ? 1.0 : -1.0;
            } else {
                const double mag = std::pow(std::abs(z), alpha);
                dst[i] = z > 0.0 ? mag : -mag;
            }
        }
    });
    return out;
}

namespace {

// Ranks one column into out (stride = cols). order is scratch of size N.
void rank_column(const Matrix& m, std::size_t col, TiePolicy tie,
                 std::vector<std::size_t>& order, Matrix& out) {
    const std::size_t n = m.rows();
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Stable: tied values keep ascending row order, which stable_order uses
    // directly and the block policies are insensitive to.
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                         return m(a, col) < m(b, col);
                     });
    const double inv_n = 1.0 / static_cast<double>(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && m(order[j + 1], col) == m(order[i], col)) ++j;
        // Rows order[i..j] are tied over ranks i+1 .. j+1.
        switch (tie) {
            case TiePolicy::average: {
                const double rank =
                    (static_cast<double>(i) + static_cast<double>(j)) / 2.0 +
                    1.0;
                for (std::size_t t = i; t <= j; ++t)
                    out(order[t], col) = rank * inv_n;
                break;
            }
            case TiePolicy::min:
                for (std::size_t t = i; t <= j; ++t)
                    out(order[t], col) = static_cast<double>(i + 1) * inv_n;
                break;
            case TiePolicy::max:
                for (std::size_t t = i; t <= j; ++t)
                    out(order[t], col) = static_cast<double>(j + 1) * inv_n;
                break;
            case TiePolicy::stable_order:
                for (std::size_t t = i; t <= j; ++t)
                    out(order[t], col) = static_cast<double>(t + 1) * inv_n;
                break;
        }
        i = j + 1;
    }
}

} // namespace

Matrix rank_normalize_exact(const Matrix& m, TiePolicy tie) {
    validate_matrix(m);
    Matrix out(m.rows(), m.cols());
    parallel_chunks(m.cols(), [&](std::size_t begin, std::size_t end) {
        std::vector<std::size_t> order(m.rows());
        for (std::size_t c = begin; c < end; ++c)
            rank_column(m, c, tie, order, out);
    });
    return out;
}

RankReference::RankReference(Matrix sorted_seeds, std::uint64_t seed)
    : seeds_(std::move(sorted_seeds)), seed_(seed) {
    validate_matrix(seeds_, "rank reference seeds");
    for (std::size_t c = 0; c < seeds_.cols(); ++c)
        for (std::size_t r = 1; r < seeds_.rows(); ++r)
            if (seeds_(r - 1, c) > seeds_(r, c))
                throw_error(errc::invalid_argument,
                            "rank reference seeds must be sorted ascending "
                            "per dimension");
}

RankReference fit_rank_reference(const Matrix& m, std::size_t subset_size,
                                 std::uint64_t seed) {
    validate_matrix(m);
    if (subset_size < 1 || subset_size > m.rows()) {
        std::ostringstream msg;
        msg << "subset size " << subset_size << " must lie in [1, "
            << m.rows() << "]";
        throw_error(errc::invalid_argument, msg.str());
    }
    Rng rng(seed);
    // Seeds are whole rows: one draw of row indices covers every dimension.
    const auto picked = sample_indices(m.rows(), subset_size, rng);
    Matrix seeds(subset_size, m.cols());
    for (std::size_t s = 0; s < subset_size; ++s) {
        const double* src = m.row(picked[s]);
        std::copy(src, src + m.cols(), seeds.row(s));
    }
    parallel_for(seeds.cols(), [&](std::size_t c) {
        std::vector<double> column(subset_size);
        for (std::size_t s = 0; s < subset_size; ++s) column[s] = seeds(s, c);
        std::sort(column.begin(), column.end());
        for (std::size_t s = 0; s < subset_size; ++s) seeds(s, c) = column[s];
    });
    return RankReference(std::move(seeds), seed);
}

Matrix rank_normalize_approx(const Matrix& m, const RankReference& ref) {
    validate_matrix(m);
    if (m.cols() != ref.dims()) {
        std::ostringstream msg;
        msg << "matrix has " << m.cols() << " dimensions but the reference "
            << "was fitted on " << ref.dims();
        throw_error(errc::dimension_mismatch, msg.str());
    }
    const std::size_t s = ref.subset_size();
    const Matrix& seeds = ref.seeds();
    const double inv_s = 1.0 / static_cast<double>(s);
    Matrix out(m.rows(), m.cols());
    // Column-major seed access: gather each column once, then binary-search.
    parallel_chunks(m.cols(), [&](std::size_t begin, std::size_t end) {
        std::vector<double> column(s);
        for (std::size_t c = begin; c < end; ++c) {
            for (std::size_t i = 0; i < s; ++i) column[i] = seeds(i, c);
            for (std::size_t r = 0; r < m.rows(); ++r) {
                const auto below = std::lower_bound(column.begin(),
                                                    column.end(), m(r, c)) -
                                   column.begin();
                out(r, c) = static_cast<double>(below) * inv_s;
            }
        }
    });
    return out;
}

std::vector<Matrix> within_group_rank_normalize(
    const std::vector<const Matrix*>& groups, TiePolicy tie) {
    if (groups.empty())
        throw_error(errc::invalid_argument, "no groups given");
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (!groups[g])
            throw_error(errc::invalid_argument, "null group matrix");
        validate_matrix(*groups[g], "group matrix");
        if (groups[g]->cols() != groups[0]->cols()) {
            std::ostringstream msg;
            msg << "group " << g << " has " << groups[g]->cols()
                << " dimensions, expected " << groups[0]->cols();
            throw_error(errc::dimension_mismatch, msg.str());
        }
    }
    std::vector<Matrix> out;
    out.reserve(groups.size());
    for (const Matrix* g : groups) out.push_back(rank_normalize_exact(*g, tie));
    return out;
}

void save_rank_reference(const RankReference& ref, const std::string& path) {
    io::write_matrix_binary(ref.seeds(), path);
    nlohmann::json sidecar{
        {"kind", "rank_reference"},
        {"subset_size", ref.subset_size()},
        {"dims", ref.dims()},
        {"seed", ref.seed()},
    };
    io::write_text_file(path + ".json", sidecar.dump(2) + "\n");
}

RankReference load_rank_reference(const std::string& path) {
    Matrix seeds = io::read_matrix_binary(path);
    const std::string sidecar_path = path + ".json";
    nlohmann::json sidecar;
    try {
        sidecar = nlohmann::json::parse(io::read_text_file(sidecar_path));
    } catch (const nlohmann::json::exception& e) {
        throw_error(errc::format, sidecar_path + ": " + e.what());
    }
    if (!sidecar.is_object() || sidecar.value("kind", "") != "rank_reference")
        throw_error(errc::format,
                    sidecar_path + ": not a rank reference sidecar");
    const auto subset_size = sidecar.value("subset_size", std::size_t{0});
    const auto dims = sidecar.value("dims", std::size_t{0});
    if (subset_size != seeds.rows() || dims != seeds.cols())
        throw_error(errc::format,
                    sidecar_path +
                        ": sidecar shape does not match the seed matrix");
    return RankReference(std::move(seeds),
                         sidecar.value("seed", std::uint64_t{0}));
}

} // namespace rankkit
