#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace subdiff::num {

// Static-chunked parallel loop over [begin, end). Chunk boundaries depend
// only on the range and thread count, and workers write disjoint outputs,
// so results are bitwise independent of scheduling.
template <class F>
void parallel_for(std::size_t begin, std::size_t end, int threads, F&& body) {
    std::size_t n = end > begin ? end - begin : 0;
    if (n == 0) return;
    std::size_t t = threads < 1 ? 1 : static_cast<std::size_t>(threads);
    if (t > n) t = n;
    if (t == 1) {
        for (std::size_t i = begin; i < end; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(t);
    std::size_t chunk = (n + t - 1) / t;
    for (std::size_t w = 0; w < t; ++w) {
        std::size_t lo = begin + w * chunk;
        std::size_t hi = lo + chunk < end ? lo + chunk : end;
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

// Chunked variant: body(lo, hi) runs once per worker over a contiguous
// sub-range, which lets callers keep per-worker scratch buffers.
template <class F>
void parallel_chunks(std::size_t begin, std::size_t end, int threads, F&& body) {
    std::size_t n = end > begin ? end - begin : 0;
    if (n == 0) return;
    std::size_t t = threads < 1 ? 1 : static_cast<std::size_t>(threads);
    if (t > n) t = n;
    if (t == 1) {
        body(begin, end);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(t);
    std::size_t chunk = (n + t - 1) / t;
    for (std::size_t w = 0; w < t; ++w) {
        std::size_t lo = begin + w * chunk;
        std::size_t hi = lo + chunk < end ? lo + chunk : end;
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] { body(lo, hi); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace subdiff::num
