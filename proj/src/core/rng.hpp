#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "core/error.hpp"

namespace rankkit {

// splitmix64 finalizer. Used for seeding and for deriving independent
// sub-stream seeds from a base seed.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stable seed for stream `stream` of a run seeded with `base`. Distinct
// streams stay decorrelated even for adjacent base seeds.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return mix64(mix64(base) ^ mix64(stream ^ 0xd6e8feb86659fd93ULL));
}

// xoshiro256++ with splitmix64 state expansion. Self-contained so that
// sequences are reproducible across standard libraries and platforms,
// which <random> distributions do not guarantee.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) {
            sm += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = sm;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            word = z ^ (z >> 31);
        }
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0)
            state_[0] = 1;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53 significant bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [0, bound) without modulo bias (masked rejection).
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound == 0)
            throw_error(errc::invalid_argument, "rng bound must be positive");
        std::uint64_t mask = bound - 1;
        mask |= mask >> 1;
        mask |= mask >> 2;
        mask |= mask >> 4;
        mask |= mask >> 8;
        mask |= mask >> 16;
        mask |= mask >> 32;
        for (;;) {
            const std::uint64_t x = next_u64() & mask;
            if (x < bound) return x;
        }
    }

    // Standard normal via Box-Muller; the second deviate of each pair is
    // cached, so draws come in a fixed order regardless of call sites.
    double next_gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - next_double(); // (0, 1], keeps log finite
        const double u2 = next_double();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4] = {};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Uniform sample of `count` distinct values from [0, population) via a
// partial Fisher-Yates pass. Order of the result is the draw order.
inline std::vector<std::size_t> sample_indices(std::size_t population,
                                               std::size_t count, Rng& rng) {
    if (count > population)
        throw_error(errc::invalid_argument,
                    "sample size exceeds population size");
    std::vector<std::size_t> pool(population);
    for (std::size_t i = 0; i < population; ++i) pool[i] = i;
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j =
            i + static_cast<std::size_t>(rng.next_below(population - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    return pool;
}

} // namespace rankkit
