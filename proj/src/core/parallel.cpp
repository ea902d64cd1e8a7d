#include "core/parallel.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rankkit {

namespace {

std::atomic<int> g_threads{1};

} // namespace

void set_threads(int n) { g_threads.store(n < 1 ? 1 : n); }

int threads() { return g_threads.load(); }

void parallel_chunks(std::size_t n,
                     const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    std::size_t workers = static_cast<std::size_t>(g_threads.load());
    if (workers > n) workers = n;
    if (workers <= 1) {
        fn(0, n);
        return;
    }

    // Chunk boundaries depend only on n and the chunk count, but each chunk
    // is a plain serial loop over its own indices, so outputs are identical
    // for every worker count.
    const std::size_t base = n / workers;
    const std::size_t extra = n % workers;

    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);

    std::size_t begin = 0;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t len = base + (w < extra ? 1 : 0);
        const std::size_t end = begin + len;
        pool.emplace_back([&, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
        begin = end;
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace rankkit
