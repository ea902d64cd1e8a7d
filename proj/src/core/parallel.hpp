#pragma once

#include <cstddef>
#include <functional>

namespace rankkit {

// Worker thread count for parallel kernels. Thread count never changes
// results: work is split into contiguous index chunks and every index is
// processed with the same arithmetic order as the serial loop.
void set_threads(int n);
int threads();

// Calls fn(begin, end) for disjoint chunks covering [0, n). Runs inline when
// a single thread suffices. The first exception thrown by any chunk is
// rethrown on the calling thread after all workers finish.
void parallel_chunks(std::size_t n,
                     const std::function<void(std::size_t, std::size_t)>& fn);

// Per-index convenience wrapper over parallel_chunks.
inline void parallel_for(std::size_t n,
                         const std::function<void(std::size_t)>& fn) {
    parallel_chunks(n, [&fn](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) fn(i);
    });
}

} // namespace rankkit
