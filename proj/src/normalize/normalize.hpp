#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/matrix.hpp"

namespace rankkit {

// How tied values share ranks. `average` assigns the mean of the spanned
// ranks, `min`/`max` the first/last, `stable_order` breaks ties by original
// row index so every row gets a distinct rank.
enum class TiePolicy { average, min, max, stable_order };

TiePolicy parse_tie_policy(const std::string& name);
const char* tie_policy_name(TiePolicy tie);

// Rows with nonzero Euclidean norm are scaled to unit norm; all-zero rows
// pass through unchanged. Norms are accumulated left to right so results
// do not depend on the worker count.
Matrix l2_normalize(const Matrix& m);

// Element-wise sign(z)|z|^alpha for alpha in [0,1]. alpha=1 is the identity
// (bitwise), alpha=0 the sign step function with 0 mapped to 0.
Matrix power_normalize(const Matrix& m, double alpha);

// Per column, each value becomes its 1-based ascending rank divided by the
// row count, so a no-ties column maps onto {1/N, ..., N/N}.
Matrix rank_normalize_exact(const Matrix& m, TiePolicy tie);

// Sorted per-dimension seed values for ranking out-of-sample data: column d
// holds the values of the selected seed rows in dimension d, ascending.
class RankReference {
public:
    RankReference(Matrix sorted_seeds, std::uint64_t seed);

    const Matrix& seeds() const { return seeds_; }
    std::size_t subset_size() const { return seeds_.rows(); }
    std::size_t dims() const { return seeds_.cols(); }
    std::uint64_t seed() const { return seed_; }

private:
    Matrix seeds_; // subset_size x dims, each column sorted ascending
    std::uint64_t seed_;
};

// Selects subset_size distinct rows of m (uniformly, deterministic in seed)
// and keeps their values per dimension, sorted.
RankReference fit_rank_reference(const Matrix& m, std::size_t subset_size,
                                 std::uint64_t seed);

// Each value z in dimension d becomes |{s in seeds_d : s < z}| / subset_size.
// Strict less-than keeps outputs in [0,1] and makes subset_size=1 a clean
// binarization.
Matrix rank_normalize_approx(const Matrix& m, const RankReference& ref);

// rank_normalize_exact applied independently inside each group. All groups
// must share the column count.
std::vector<Matrix> within_group_rank_normalize(
    const std::vector<const Matrix*>& groups, TiePolicy tie);

// Seed matrix in the binary matrix format at `path`, subset size and fit
// seed in a JSON sidecar at `path`.json.
void save_rank_reference(const RankReference& ref, const std::string& path);
RankReference load_rank_reference(const std::string& path);

} // namespace rankkit
