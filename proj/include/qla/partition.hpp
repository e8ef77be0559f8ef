#pragma once

#include <string>
#include <vector>

#include "qla/energy.hpp"
#include "qla/estimate.hpp"
#include "qla/sampling.hpp"

namespace qla {

// Grand partition function by uniform draws over Lambda^n, n <= n_max
// (n_max < 0: smallest n with stability tail < 1e-6 of the partial sum).
Estimate z_grand(const Potential& p, const Region& region, const EnsembleParams& ens, int n_max,
                 std::size_t samples, std::uint64_t seed, int workers = 1);

// Dilute partition function Z^-.
Estimate z_dilute(const Potential& p, const Region& region, const EnsembleParams& ens, DiluteMode mode,
                  const Budget& budget);

// Z^+ = Z / Z^- from independent z_grand and z_dilute estimates.
Estimate z_plus(const Potential& p, const Region& region, const EnsembleParams& ens, const Budget& budget);

// Z^+ = 1 + sum over nonempty dense cube sets X of Z_X / Z^-; needs N <= 16.
Estimate z_plus_direct(const Potential& p, const Region& region, const EnsembleParams& ens,
                       const Budget& budget);

// Sum over all 2^N per-cube indicator assignments of uniform-draw estimates
// of Z restricted to that assignment; each assignment has its own stream.
Estimate z_partition_of_unity(const Potential& p, const Region& region, const EnsembleParams& ens,
                              const Budget& budget);

struct Epsilon1 {
    double closed = 0.0;  // 1/2 z^2 a^{2d} e^{-beta(b-5v0)} exp{z a^d e^{-beta(b-3v0)}}
    double series = 0.0;  // sum_{n>=2} (z a^d)^n/n! e^{-beta(b-2v0)n^2/4 + 3 beta v0 n/2}
};

Epsilon1 epsilon1(const StabilityConstants& c, const EnsembleParams& ens, int d);

struct PressureRow {
    double a = 0.0;
    std::size_t n_cubes = 0;
    double volume = 0.0;
    Estimate z_minus;      // Z^-
    Estimate z_excess;     // D = Z - Z^-
    double p_full = 0.0, p_full_err = 0.0;
    double p_minus = 0.0, p_minus_err = 0.0;
    double p_plus = 0.0, p_plus_err = 0.0;
    double eps1 = 0.0;
    double eps1_series = 0.0;
    double bound = 0.0;    // (1/(beta a^d)) log(1 + eps1)
    bool bound_ok = true;  // p_plus <= bound + 3 sigma
};

// One row per region. Z^- and D = Z - Z^- are estimated independently (see
// sampling.hpp); constants are taken at each region's edge.
std::vector<PressureRow> pressures(const Potential& p, const std::vector<Region>& regions,
                                   const EnsembleParams& ens, const Budget& budget,
                                   DiluteMode mode = DiluteMode::automatic);

// Fitted slope of log eps1 against a^-s over a sweep (the e^{-1/a^s} tag).
double eps1_slope(const std::vector<PressureRow>& rows, double s);

// Box of physical extent `length` per axis at edge a; throws when length/a is
// not an integer.
Region box_of_length(double a, int d, double length);

}  // namespace qla
