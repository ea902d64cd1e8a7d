#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "core/matrix.hpp"

namespace rankkit {

// Controls for iterative score re-ranking: iters is the total iteration
// count W, so W-1 update sweeps run; eta anneals later sweeps; beta sets
// the exponential decay over sorted competitor scores.
struct MirParams {
    double eta = 0.5;
    double beta = 1.0;
    std::size_t iters = 4;
};

// Throws unless eta > 0, beta > 0 and iters >= 1.
void validate_mir_params(const MirParams& params);

// Per-iteration record: snapshots[0] is the input, snapshots[iters-1] the
// output; max_abs_update[w] is the largest |change| of sweep w+1 (iters-1
// entries).
struct MirTrace {
    std::vector<Matrix> snapshots;
    std::vector<double> max_abs_update;
};

// Multi-class iterative re-ranking. Sweep w (1-based) simultaneously
// updates every entry to
//   P(i,j) - eta^(w-1) * sum_{r=1..K-1} exp(-beta*r) * delta(r)
// where delta is row i's scores sorted descending with one occurrence of
// P(i,j) removed. All reads within a sweep see the previous sweep's matrix.
// Scores with a dominant class survive; flat profiles are pushed down.
Matrix mir_rerank(const Matrix& scores, const MirParams& params,
                  MirTrace* trace = nullptr);

std::string mir_trace_to_json(const MirTrace& trace);

enum class MinMaxMode { per_row, global };

MinMaxMode parse_minmax_mode(const std::string& name);

// Affine map onto [0,1] per row or over the whole matrix. A constant row
// (or constant matrix in global mode) maps to all 0.5.
Matrix minmax_normalize_scores(const Matrix& scores, MinMaxMode mode);

// Row min-max normalized, then sorted descending: steep profiles mark easy
// samples, flat ones difficult samples.
std::vector<double> rolloff_profile(const Matrix& scores, std::size_t row);

} // namespace rankkit
