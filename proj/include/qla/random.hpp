#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace qla {

std::uint64_t splitmix64(std::uint64_t x);

// Stable 64-bit tag for a name, used to give each operation its own streams.
std::uint64_t stream_tag(const char* name);

// Substream keyed by (seed, path...). Two streams with different paths are
// statistically independent; the same key always replays the same draws.
class Stream {
public:
    Stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

    double uniform();  // [0, 1), 53 random bits
    std::uint64_t below(std::uint64_t n);  // uniform integer in [0, n)
    int poisson(double mean);
    // Poisson(mean) conditioned on lo <= k <= hi (hi < 0 means unbounded).
    int poisson_between(double mean, int lo, int hi);

private:
    std::mt19937_64 eng_;
};

// Mass e^{-x} sum_{k=lo..hi} x^k/k! of a Poisson(x) law (hi < 0: unbounded).
double poisson_mass(double x, int lo, int hi);

}  // namespace qla
