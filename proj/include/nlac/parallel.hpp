#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace nlac {

/// Worker count: NLAC_THREADS when set (clamped to >= 1), otherwise the
/// hardware concurrency capped at 8.
int thread_count();

/// Deterministic blocked map-reduce over [0, n): the index range is cut
/// into fixed-size blocks, each block is reduced sequentially by
/// `per_block`, and block results are combined in block order.  The
/// result is bit-identical for every worker count.
template <class T, class PerBlock, class Combine>
T blocked_reduce(std::size_t n, std::size_t block_size, T init, PerBlock&& per_block,
                 Combine&& combine) {
    if (n == 0) return init;
    const std::size_t nblocks = (n + block_size - 1) / block_size;
    std::vector<T> partial(nblocks, init);
    const int workers = std::min<std::size_t>(thread_count(), nblocks);

    if (workers <= 1) {
        for (std::size_t b = 0; b < nblocks; ++b) {
            const std::size_t lo = b * block_size, hi = std::min(n, lo + block_size);
            partial[b] = per_block(lo, hi);
        }
    } else {
        std::atomic<std::size_t> next{0};
        auto work = [&]() {
            for (;;) {
                const std::size_t b = next.fetch_add(1);
                if (b >= nblocks) break;
                const std::size_t lo = b * block_size, hi = std::min(n, lo + block_size);
                partial[b] = per_block(lo, hi);
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    T acc = init;
    for (std::size_t b = 0; b < nblocks; ++b) acc = combine(acc, partial[b]);
    return acc;
}

}  // namespace nlac
