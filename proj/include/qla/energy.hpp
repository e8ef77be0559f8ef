#pragma once

#include <limits>

#include "qla/lattice.hpp"
#include "qla/potential.hpp"

namespace qla {

// Energy that may be +infinity (hard-core violation). exp(-beta*inf) is
// exactly 0 through boltzmann().
struct Energy {
    double value = 0.0;
    bool infinite = false;

    static Energy inf() { return {std::numeric_limits<double>::infinity(), true}; }
    double boltzmann(double beta) const;
};

// U(gamma), sum over unordered pairs. Throws DomainError on coincident points.
double total_energy(const Potential& p, const Configuration& gamma);

// W(eta; gamma), sum over cross pairs.
double interaction_energy(const Potential& p, const Configuration& eta, const Configuration& gamma);

// U under the hat potential: +infinity if a cube holds two or more points.
Energy hardcore_energy(const Potential& p, const CubeGrid& grid, const Configuration& gamma);

struct StabilityConstants {
    double a = 0.0;
    double b = 0.0;
    double v0 = 0.0;
    double A = 0.0;
    double B_local = 0.0;
    double C_d = 0.0;
    double a_m = 0.0;
    double B_global = 0.0;
    double m_exponent = 2.0;  // diagnostic 1 + s/d
};

// Sum over cube offsets k with |k|_inf <= max_offset of the sup of phi- over
// pairs of points in cubes 0 and k.
double lattice_sup_sum(const Potential& p, const CubeGrid& grid, long max_offset);

// Upper bound for the same sum restricted to |k|_inf > max_offset.
double lattice_sup_tail(const Potential& p, const CubeGrid& grid, long max_offset);

// b, v0, A, B_local, C_d at the grid's edge. a_m and B_global are left 0;
// see global_bounds. Throws PreconditionError for a >= r0 or s == d, and
// PreconditionError ("edge too coarse") when b <= 2 v0.
StabilityConstants stability_constants(const Potential& p, const CubeGrid& grid, double tol = 1e-10);

struct GlobalBounds {
    double a_m = 0.0;
    double B_global = 0.0;
    bool sign_change = false;  // false: no root of b = 2 v0 below r0, a_m = r0
    double phi_minus_integral = 0.0;
    // Closed forms for B: with the integral of phi-, with a_m^d v0(a_m), and
    // with the core constant phi0 in both slots.
    double B_closed_integral = 0.0;
    double B_closed_effective = 0.0;
    double B_closed_overload = 0.0;
    double a_m_lower_integral = 0.0;
    double a_m_lower_effective = 0.0;
};

GlobalBounds global_bounds(const Potential& p, double tol = 1e-10);

// Fills a_m and B_global from global_bounds.
StabilityConstants full_constants(const Potential& p, const CubeGrid& grid, double tol = 1e-10);

// U(gamma) - [A sum_{|gamma_D| >= 2} |gamma_D|^2 - B_local |gamma|].
double check_superstability(const StabilityConstants& c, const Potential& p, const CubeGrid& grid,
                            const Configuration& gamma);

}  // namespace qla
