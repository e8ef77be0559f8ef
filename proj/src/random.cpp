#include "qla/random.hpp"

#include <cmath>

namespace qla {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t stream_tag(const char* name) {
    // FNV-1a
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char* p = name; *p; ++p) {
        h ^= static_cast<unsigned char>(*p);
        h *= 0x100000001b3ULL;
    }
    return h;
}

Stream::Stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = splitmix64(seed);
    for (std::uint64_t id : path) h = splitmix64(h ^ splitmix64(id + 0x632be59bd9b4e019ULL));
    eng_.seed(h);
}

double Stream::uniform() { return static_cast<double>(eng_() >> 11) * 0x1p-53; }

std::uint64_t Stream::below(std::uint64_t n) {
    // rejection keeps it exactly uniform
    std::uint64_t lim = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do x = eng_();
    while (x >= lim);
    return x % n;
}

int Stream::poisson(double mean) { return poisson_between(mean, 0, -1); }

double poisson_mass(double x, int lo, int hi) {
    if (hi >= 0 && hi < lo) return 0.0;
    if (x == 0.0) return lo == 0 ? 1.0 : 0.0;
    double pk = std::exp(-x);  // P(k) at k = 0
    double below = 0.0;
    for (int k = 0; k < lo; ++k) {
        below += pk;
        pk *= x / (k + 1);
    }
    if (hi >= 0) {
        double s = 0.0;
        for (int k = lo; k <= hi; ++k) {
            s += pk;
            pk *= x / (k + 1);
        }
        return s;
    }
    // Upper tail: sum directly while terms are large relative to the sum,
    // which avoids the cancellation in 1 - below for small x.
    if (x > 20.0 || below < 0.5) return 1.0 - below > 0.0 ? 1.0 - below : 0.0;
    double s = 0.0;
    for (int k = lo; k < lo + 1000; ++k) {
        s += pk;
        pk *= x / (k + 1);
        if (pk < 1e-18 * s) break;
    }
    return s;
}

int Stream::poisson_between(double mean, int lo, int hi) {
    if (mean <= 0.0) return lo;
    double total = poisson_mass(mean, lo, hi);
    double u = uniform() * total;
    double pk = std::exp(-mean);
    for (int k = 0; k < lo; ++k) pk *= mean / (k + 1);
    int k = lo;
    for (;;) {
        if (hi >= 0 && k >= hi) return hi;
        u -= pk;
        if (u < 0.0 || pk == 0.0) return k;
        pk *= mean / (k + 1);
        ++k;
    }
}

}  // namespace qla
