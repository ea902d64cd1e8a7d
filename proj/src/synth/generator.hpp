#pragma once

#include <cstdint>
#include <utility>

#include "core/matrix.hpp"

namespace rankkit {

// Generator controls for sparse, bursty, class-structured features.
// Each class owns a contiguous signal block of dims/classes dimensions with
// mean signal_strength (zero elsewhere); the first burst_dims dimensions of
// that block (wrapping modulo dims) receive log-normal burst multipliers
// exp(gaussian(0, burst_scale)), so a few entries dominate linear
// similarity the way aggregated-descriptor encodings do.
struct SynthParams {
    std::size_t n_per_class = 60;
    std::size_t classes = 8;
    std::size_t dims = 512;
    double p_sparse = 0.7;      // probability an entry is exactly 0
    std::size_t burst_dims = 16;
    double burst_scale = 2.5;   // log-normal sigma; 0 disables bursts
    double signal_strength = 1.0;
    double noise_sigma = 0.25;
    std::uint64_t seed = 0;
};

void validate_synth_params(const SynthParams& params);

// Rows are class-major (class 0 first) and generated in index order from a
// single PRNG stream, entry by entry: a sparsity draw, then, for surviving
// entries, a gaussian value draw and (on burst dimensions) a burst draw.
// Same params therefore always reproduce the same matrix bit for bit.
std::pair<Matrix, Labels> generate_sparse_bursty(const SynthParams& params);

struct Split {
    Matrix train_x;
    Labels train_y;
    Matrix test_x;
    Labels test_y;
};

// Stratified deterministic split. Per class, round(train_fraction * n_k)
// samples go to the training side (clamped so both sides keep at least
// one); membership is drawn per class from a seed-derived stream, and each
// side preserves the original row order.
Split benchmark_split(const Matrix& features, const Labels& labels,
                      double train_fraction, std::uint64_t seed);

} // namespace rankkit
