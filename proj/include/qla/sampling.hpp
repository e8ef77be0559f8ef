#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "qla/estimate.hpp"
#include "qla/lattice.hpp"
#include "qla/potential.hpp"

namespace qla {

struct EnsembleParams {
    double z = 1.0;
    double beta = 1.0;
};

struct Budget {
    std::size_t samples = 100000;  // per estimator (per n-term for series)
    int workers = 1;
    std::uint64_t seed = 1;
    int quad_nodes = 8;            // Gauss-Legendre nodes per axis per cube
    int n_max = -1;                // -1: automatic truncation
    double work_cap = 5e7;         // enumeration leaves
};

struct WeightedPoint {
    Point x;
    double w = 0.0;
};

// Tensor Gauss-Legendre nodes of one cube; weights sum to a^d.
std::vector<WeightedPoint> cube_rule(const CubeGrid& g, const CubeIndex& cube, int m);

enum class DiluteMode { automatic, enumerate, monte_carlo };

// The integrals below are all of the form
//   I = sum_n z^n/n! int_{Lambda^n} e^{-beta U(eta u gamma)} 1[constraint] dgamma,
// i.e. integrals of the Poisson measure of activity z over gamma in Lambda with
// eta held fixed. Factors z^{|eta|} are left to the caller.

// Sum over n <= n_max of uniform-draw estimates over Lambda^n. `filter`
// (may be empty) restricts the integrand to configurations eta u gamma it
// accepts. B bounds the stability constant for the tail bound.
Estimate uniform_series(const Potential& p, const Region& region, const EnsembleParams& ens,
                        const Configuration& eta, const Budget& budget, double B, std::uint64_t tag,
                        const std::function<bool(const Configuration&)>& filter = {});

// eta u gamma dilute.
Estimate dilute_integral(const Potential& p, const Region& region, const EnsembleParams& ens,
                         const Configuration& eta, const Budget& budget, DiluteMode mode, std::uint64_t tag);

// eta u gamma not dilute.
Estimate nondilute_integral(const Potential& p, const Region& region, const EnsembleParams& ens,
                            const Configuration& eta, const Budget& budget, std::uint64_t tag);

// Set of cubes holding >= 2 points of eta u gamma equals the slot set `dense`.
Estimate dense_set_integral(const Potential& p, const Region& region, const EnsembleParams& ens,
                            const Configuration& eta, const std::vector<int>& dense, const Budget& budget,
                            std::uint64_t tag);

// No constraint: Poisson-per-cube sampling of the whole measure.
Estimate poisson_integral(const Potential& p, const Region& region, const EnsembleParams& ens,
                          const Configuration& eta, const Budget& budget, std::uint64_t tag);

// e^{-beta U(gamma)} with early exit to 0 for nonnegative potentials once the
// Boltzmann factor underflows.
double boltzmann(const Potential& p, double beta, const Configuration& gamma);

// Smallest B with U >= -B|gamma| used for truncation bounds: 0 for
// nonnegative potentials, B_global otherwise.
double stability_B(const Potential& p);

}  // namespace qla
