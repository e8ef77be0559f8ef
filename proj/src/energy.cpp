#include "qla/energy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>

#include "qla/errors.hpp"
#include "qla/quadrature.hpp"

namespace qla {
namespace {

double pair_phi(const Potential& p, const Point& x, const Point& y) {
    double r2 = dist2(x, y);
    if (r2 == 0.0) throw DomainError("coincident points in configuration");
    return p.eval_sq(r2);
}

// Longest separation inside one cube.
double cube_diameter(const CubeGrid& g) { return g.a * std::sqrt(static_cast<double>(g.d)); }

double offset_sup(const Potential& p, const CubeGrid& g, const std::array<long, kMaxDim>& k) {
    double lo = 0.0, hi = 0.0;
    for (int i = 0; i < g.d; ++i) {
        double m = static_cast<double>(std::labs(k[i]));
        double l = std::max(m - 1.0, 0.0);
        lo += l * l;
        hi += (m + 1.0) * (m + 1.0);
    }
    return p.sup_phi_minus(g.a * std::sqrt(lo), g.a * std::sqrt(hi));
}

double shell_count(int d, long m) {
    if (m == 0) return 1.0;
    return std::pow(2.0 * m + 1.0, d) - std::pow(2.0 * m - 1.0, d);
}

long exact_radius(const CubeGrid& g, double reach) {
    if (g.d == 1) return 1;
    long cap = g.d == 2 ? 1500 : 100;
    long want = static_cast<long>(std::ceil(4.0 * reach / g.a)) + 1;
    return std::min(cap, std::max(2L, want));
}

double reach_of(const Potential& p) {
    auto w = p.well();
    if (!w) return 0.0;
    AssumptionAParams c = certify_assumption_a(p);
    return std::max(*w, c.R);
}

double v0_of(const Potential& p, const CubeGrid& g) {
    if (!p.well()) return 0.0;
    long M = exact_radius(g, reach_of(p));
    return lattice_sup_sum(p, g, M) + lattice_sup_tail(p, g, M);
}

double b_of(const Potential& p, const CubeGrid& g) { return p.inf_phi_plus(cube_diameter(g)); }

}  // namespace

double Energy::boltzmann(double beta) const { return infinite ? 0.0 : std::exp(-beta * value); }

double total_energy(const Potential& p, const Configuration& gamma) {
    double u = 0.0;
    for (std::size_t i = 0; i < gamma.size(); ++i)
        for (std::size_t j = i + 1; j < gamma.size(); ++j) u += pair_phi(p, gamma[i], gamma[j]);
    return u;
}

double interaction_energy(const Potential& p, const Configuration& eta, const Configuration& gamma) {
    double w = 0.0;
    for (const auto& x : eta)
        for (const auto& y : gamma) w += pair_phi(p, x, y);
    return w;
}

Energy hardcore_energy(const Potential& p, const CubeGrid& grid, const Configuration& gamma) {
    double u = total_energy(p, gamma);
    for (const auto& [cube, n] : occupancy(grid, gamma))
        if (n >= 2) return Energy::inf();
    return {u, false};
}

double lattice_sup_sum(const Potential& p, const CubeGrid& g, long M) {
    // sup depends on |k_i| only: sum over nonnegative offsets with multiplicity
    long e1 = g.d >= 2 ? M : 0, e2 = g.d >= 3 ? M : 0;
    double s = 0.0;
    for (long i = 0; i <= M; ++i)
        for (long j = 0; j <= e1; ++j)
            for (long k = 0; k <= e2; ++k) {
                double mult = (i ? 2.0 : 1.0) * (j ? 2.0 : 1.0) * (k ? 2.0 : 1.0);
                s += mult * offset_sup(p, g, {i, j, k});
            }
    return s;
}

double lattice_sup_tail(const Potential& p, const CubeGrid& g, long M) {
    auto w = p.well();
    if (!w) return 0.0;
    AssumptionAParams c = certify_assumption_a(p);
    const int d = g.d;
    const double a = g.a;
    // every cube of shell m is at distance >= a(m-1); phi- is decreasing past the well
    auto g_sup = [&](double r) { return p.sup_phi_minus(r, std::numeric_limits<double>::infinity()); };
    double reach = std::max(*w, c.R);
    long M2 = std::max(M + 1, static_cast<long>(std::ceil(8.0 * reach / a)) + 2);
    double s = 0.0;
    const double diag = std::sqrt(static_cast<double>(d));
    for (long m = M + 1; m <= M2; ++m) s += shell_count(d, m) * p.sup_phi_minus(a * (m - 1), a * (m + 1) * diag);
    // shells beyond M2: sum of a decreasing function bounded by its integral
    auto h = [&](double t) { return 2.0 * d * std::pow(2.0 * t + 1.0, d - 1) * g_sup(a * (t - 1.0)); };
    double T = static_cast<double>(M2) * 1e6;
    Integral mid = integrate_log_panels(h, static_cast<double>(M2), T, 4.0);
    double q = d + c.eps0;
    double far = 2.0 * d * std::pow(3.0, d - 1) * std::pow(2.0, q) * c.phi1 * std::pow(a, -q) *
                 std::pow(T, -c.eps0) / c.eps0;
    return s + mid.value + mid.error + far;
}

StabilityConstants stability_constants(const Potential& p, const CubeGrid& grid, double tol) {
    (void)tol;
    if (p.dim() != grid.d) throw PreconditionError("potential and grid dimensions differ");
    StabilityConstants c;
    c.a = grid.a;
    if (p.family() == Family::zero) return c;
    AssumptionAParams cert = certify_assumption_a(p);
    if (!(grid.a < cert.r0))
        throw PreconditionError("cube edge a=" + std::to_string(grid.a) + " must be below r0=" +
                                std::to_string(cert.r0));
    if (cert.s == grid.d)
        throw PreconditionError("s = d (logarithmic superstability) is not supported");
    c.b = b_of(p, grid);
    c.v0 = v0_of(p, grid);
    if (!(c.b > 2.0 * c.v0)) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "edge too coarse: b(a)=%.6g <= 2*v0(a)=%.6g at a=%.6g; decrease edge_a",
                      c.b, 2.0 * c.v0, grid.a);
        throw PreconditionError(buf);
    }
    c.A = 0.25 * (c.b - 2.0 * c.v0);
    c.B_local = 0.5 * c.v0;
    const int d = grid.d;
    c.C_d = std::pow(std::numbers::pi, 0.5 * d) / (d * std::tgamma(0.5 * d)) * cert.phi0 / grid.cube_volume();
    c.m_exponent = 1.0 + cert.s / d;
    return c;
}

GlobalBounds global_bounds(const Potential& p, double tol) {
    GlobalBounds gb;
    AssumptionAParams cert = certify_assumption_a(p);
    const int d = p.dim();
    if (!p.well()) {
        gb.a_m = cert.r0;
        return gb;
    }
    auto f = [&](double a) {
        CubeGrid g(a, d);
        return b_of(p, g) - 2.0 * v0_of(p, g);
    };
    double hi = cert.r0 * (1.0 - 1e-12);
    if (f(hi) > 0.0) {
        gb.a_m = cert.r0;
    } else {
        gb.sign_change = true;
        double lo = hi;
        while (f(lo) <= 0.0) lo *= 0.5;
        hi = std::min(hi, 2.0 * lo);
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            double fm = f(mid);
            if (fm > 0.0)
                lo = mid;
            else
                hi = mid;
            if (std::fabs(fm) <= tol * b_of(p, CubeGrid(mid, d)) || hi - lo <= 1e-15 * hi) {
                lo = hi = mid;
                break;
            }
        }
        gb.a_m = 0.5 * (lo + hi);
    }
    CubeGrid gm(gb.a_m, d);
    double v0m = v0_of(p, gm);
    gb.B_global = 0.5 * v0m;
    gb.phi_minus_integral = phi_minus_integral(p).value;
    const double s = cert.s;
    auto closed = [&](double phi_int, double core) {
        return std::pow(std::pow(2.0, 2 * d - s) * std::pow(d, s * d / 2) * std::pow(phi_int, s) / std::pow(core, d),
                        1.0 / (s - d));
    };
    auto am_lower = [&](double phi_int) {
        return std::pow(cert.phi0 / (2.0 * phi_int), 1.0 / (s - d)) / std::pow(d, s / (2.0 * (s - d)));
    };
    double phi_eff = std::pow(gb.a_m, d) * v0m;
    gb.B_closed_integral = closed(gb.phi_minus_integral, cert.phi0);
    gb.B_closed_effective = closed(phi_eff, cert.phi0);
    gb.B_closed_overload = closed(cert.phi0, cert.phi0);
    gb.a_m_lower_integral = am_lower(gb.phi_minus_integral);
    gb.a_m_lower_effective = am_lower(phi_eff);
    return gb;
}

StabilityConstants full_constants(const Potential& p, const CubeGrid& grid, double tol) {
    StabilityConstants c = stability_constants(p, grid, tol);
    if (p.family() == Family::zero) return c;
    GlobalBounds gb = global_bounds(p, tol);
    c.a_m = gb.a_m;
    c.B_global = gb.B_global;
    return c;
}

double check_superstability(const StabilityConstants& c, const Potential& p, const CubeGrid& grid,
                            const Configuration& gamma) {
    double u = total_energy(p, gamma);
    double dense = 0.0;
    for (const auto& [cube, n] : occupancy(grid, gamma))
        if (n >= 2) dense += static_cast<double>(n) * n;
    return u - (c.A * dense - c.B_local * static_cast<double>(gamma.size()));
}

}  // namespace qla
