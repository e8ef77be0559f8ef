#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qla {

// Fixed sample count per chunk. Chunking depends only on the sample budget, so
// the result is identical for any number of workers.
inline constexpr std::size_t kChunkSize = 2048;

struct MeanVar {
    double n = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        n += 1.0;
        double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    void merge(const MeanVar& o) {
        if (o.n == 0.0) return;
        if (n == 0.0) {
            *this = o;
            return;
        }
        double tot = n + o.n;
        double d = o.mean - mean;
        mean += d * o.n / tot;
        m2 += o.m2 + d * d * n * o.n / tot;
        n = tot;
    }
    double variance() const { return n > 1.0 ? m2 / (n - 1.0) : 0.0; }
    // Standard error of the mean.
    double sem() const { return n > 1.0 ? std::sqrt(variance() / n) : 0.0; }
};

template <class T>
T pairwise_merge(std::vector<T>& v, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return v[lo];
    std::size_t mid = lo + (hi - lo) / 2;
    T left = pairwise_merge(v, lo, mid);
    T right = pairwise_merge(v, mid, hi);
    left.merge(right);
    return left;
}

// Runs fn(chunk, count) over ceil(samples / kChunkSize) chunks on `workers`
// threads and merges the per-chunk accumulators pairwise in chunk order.
template <class Acc, class Fn>
Acc run_chunks(std::size_t samples, int workers, Fn fn) {
    if (samples == 0) return Acc{};
    std::size_t n_chunks = (samples + kChunkSize - 1) / kChunkSize;
    std::vector<Acc> parts(n_chunks);
    auto job = [&](std::size_t c) {
        std::size_t count = std::min(kChunkSize, samples - c * kChunkSize);
        parts[c] = fn(c, count);
    };
    int w = std::max(1, std::min<int>(workers, static_cast<int>(n_chunks)));
    if (w == 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) job(c);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr err;
        std::mutex mu;
        std::vector<std::thread> pool;
        for (int t = 0; t < w; ++t)
            pool.emplace_back([&] {
                try {
                    for (std::size_t c; (c = next.fetch_add(1)) < n_chunks;) job(c);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(mu);
                    if (!err) err = std::current_exception();
                    next = n_chunks;
                }
            });
        for (auto& th : pool) th.join();
        if (err) std::rethrow_exception(err);
    }
    return pairwise_merge(parts, 0, n_chunks);
}

}  // namespace qla
