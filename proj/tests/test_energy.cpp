#include <cmath>
#include <random>

#include "doctest.h"
#include "qla/energy.hpp"
#include "qla/errors.hpp"

using namespace qla;

namespace {
Point pt(double x, double y = 0.0, double z = 0.0) { return {x, y, z}; }

Configuration random_config(std::mt19937_64& rng, int n, int d, double L) {
    std::uniform_real_distribution<double> u(0.0, L);
    Configuration g;
    for (int i = 0; i < n; ++i) {
        Point x{0, 0, 0};
        for (int k = 0; k < d; ++k) x[k] = u(rng);
        g.push_back(x);
    }
    return g;
}

// Dense-grid sup of phi- over pairs from cubes 0 and k (d = 1).
double grid_sup(const Potential& p, double a, long k, int n) {
    double best = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double x = a * (-0.5 + (i + 0.5) / n), y = a * (k - 0.5 + (j + 0.5) / n);
            if (y != x) best = std::max(best, p.split(std::fabs(y - x)).second);
        }
    return best;
}
}  // namespace

TEST_CASE("total and interaction energy examples") {
    auto p = Potential::pure_repulsive(1, 1.0, 2.0);
    CHECK(total_energy(p, {pt(0.3)}) == 0.0);
    CHECK(total_energy(p, {}) == 0.0);
    CHECK(total_energy(p, {pt(0), pt(1), pt(3)}) == doctest::Approx(1.0 + 1.0 / 9.0 + 0.25).epsilon(1e-15));
    CHECK(interaction_energy(p, {}, {pt(1)}) == 0.0);
    CHECK(interaction_energy(p, {pt(0)}, {pt(1), pt(2)}) == doctest::Approx(1.25).epsilon(1e-15));
    CHECK_THROWS_AS(total_energy(p, {pt(1), pt(1)}), DomainError);
    CHECK_THROWS_AS(interaction_energy(p, {pt(1)}, {pt(1)}), DomainError);
}

TEST_CASE("energy matches pairwise oracle and is additive") {
    std::mt19937_64 rng(1);
    auto p = Potential::lennard_jones(3, 1.0, 1.0);
    Configuration g = random_config(rng, 50, 3, 6.0);
    double oracle = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = 0; j < g.size(); ++j)
            if (i != j) oracle += 0.5 * p.eval(std::sqrt(dist2(g[i], g[j])));
    CHECK(total_energy(p, g) == doctest::Approx(oracle).epsilon(1e-12));

    for (int t = 0; t < 50; ++t) {
        Configuration all = random_config(rng, 20, 2, 5.0);
        auto q = Potential::power_core_with_tail(2, 1.0, 6.0, 0.3, 1.0);
        Configuration eta(all.begin(), all.begin() + 7), gam(all.begin() + 7, all.end());
        double lhs = total_energy(q, all);
        double rhs = total_energy(q, eta) + total_energy(q, gam) + interaction_energy(q, eta, gam);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("hardcore energy") {
    auto p = Potential::pure_repulsive(1, 1.0, 2.0);
    CubeGrid g1(1.0, 1), gh(0.5, 1);
    Configuration dil{pt(0.1), pt(1.2), pt(2.9)};
    Energy e = hardcore_energy(p, g1, dil);
    CHECK_FALSE(e.infinite);
    CHECK(e.value == total_energy(p, dil));
    Energy inf = hardcore_energy(p, g1, {pt(0.1), pt(0.2)});
    CHECK(inf.infinite);
    CHECK(inf.boltzmann(1.0) == 0.0);
    Energy f = hardcore_energy(p, gh, {pt(0.1), pt(0.6)});
    CHECK_FALSE(f.infinite);
    CHECK(f.value == doctest::Approx(p.eval(0.5)));

    std::mt19937_64 rng(9);
    Region r = Region::box(CubeGrid(0.4, 1), {10});
    for (int t = 0; t < 300; ++t) {
        Configuration c = random_config(rng, static_cast<int>(rng() % 6), 1, 3.8);
        for (auto& x : c) x[0] -= 0.19;
        CHECK(hardcore_energy(p, r.grid(), c).infinite == (chi_minus(r, c) == 0));
    }
}

TEST_CASE("stability constants pure-repulsive") {
    auto p = Potential::pure_repulsive(1, 1.0, 2.0);
    StabilityConstants c = stability_constants(p, CubeGrid(0.5, 1));
    CHECK(c.b == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(c.v0 == 0.0);
    CHECK(c.A == doctest::Approx(1.0));
    CHECK(c.B_local == 0.0);
    CHECK(c.C_d == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(c.m_exponent == 3.0);
    CHECK_THROWS_AS(stability_constants(p, CubeGrid(1.0, 1)), PreconditionError);
    GlobalBounds gb = global_bounds(p);
    CHECK(gb.B_global == 0.0);
    CHECK(gb.a_m == 1.0);
}

TEST_CASE("v0 matches brute-force sup over 1000 cubes") {
    auto p = Potential::power_core_with_tail(1, 1.0, 4.0, 0.1, 1.0);
    CubeGrid g(0.3, 1);
    double brute = 0.0;
    for (long k = -500; k <= 500; ++k) brute += grid_sup(p, g.a, k, 48);
    double exact = lattice_sup_sum(p, g, 500);
    // grid sup approaches the exact sup from below
    CHECK(exact >= brute);
    CHECK(exact == doctest::Approx(brute).epsilon(2e-3));
    StabilityConstants c = stability_constants(p, g);
    CHECK(c.v0 >= exact);
    double far = lattice_sup_sum(p, g, 200000);
    CHECK(c.v0 >= far);
    CHECK(c.v0 == doctest::Approx(far + lattice_sup_tail(p, g, 200000)).epsilon(1e-3));
    CHECK(c.A == doctest::Approx(0.25 * (c.b - 2.0 * c.v0)));
    CHECK(c.B_local == doctest::Approx(0.5 * c.v0));
}

TEST_CASE("a^d v0 tends to the phi- integral") {
    auto p = Potential::power_core_with_tail(1, 1.0, 4.0, 0.1, 1.0);
    double phi = phi_minus_integral(p).value;
    double prev_gap = 1e300;
    for (double a : {0.4, 0.2, 0.1, 0.05, 0.025}) {
        CubeGrid g(a, 1);
        double v0 = lattice_sup_sum(p, g, 1) + lattice_sup_tail(p, g, 1);
        double gap = std::fabs(a * v0 - phi);
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
    CHECK(prev_gap / phi < 0.05);
}

TEST_CASE("edge too coarse") {
    auto p = Potential::power_core_with_tail(1, 1.0, 4.0, 0.1, 1.0);
    GlobalBounds gb = global_bounds(p, 1e-10);
    CHECK(gb.sign_change);
    double above = gb.a_m * 1.01;
    if (above < certify_assumption_a(p).r0) CHECK_THROWS_AS(stability_constants(p, CubeGrid(above, 1)), PreconditionError);
    StabilityConstants c = stability_constants(p, CubeGrid(gb.a_m * 0.99, 1));
    CHECK(c.A > 0.0);
}

TEST_CASE("global bounds root matches a dense scan") {
    auto p = Potential::power_core_with_tail(1, 1.0, 4.0, 0.1, 1.0);
    GlobalBounds gb = global_bounds(p, 1e-10);
    double r0 = certify_assumption_a(p).r0;
    auto f = [&](double a) {
        CubeGrid g(a, 1);
        return p.inf_phi_plus(a) - 2.0 * (lattice_sup_sum(p, g, 1) + lattice_sup_tail(p, g, 1));
    };
    double lo = 0.0, hi = 0.0, prev = f(r0 * 1e-3);
    for (int i = 2; i <= 1000; ++i) {
        double a = r0 * i / 1000.0 * (1.0 - 1e-12);
        double v = f(a);
        if (prev > 0 && v <= 0) {
            lo = r0 * (i - 1) / 1000.0;
            hi = a;
            break;
        }
        prev = v;
    }
    CHECK(gb.a_m >= lo);
    CHECK(gb.a_m <= hi);
    CubeGrid gm(gb.a_m, 1);
    double b = p.inf_phi_plus(gb.a_m);
    CHECK(std::fabs(f(gb.a_m)) <= 1e-10 * b);
    CHECK(gb.B_global > 0.0);
    // rigorous with the effective integral a_m^d v0(a_m)
    CHECK(gb.B_global <= gb.B_closed_effective * (1 + 1e-9));
    CHECK(gb.a_m >= gb.a_m_lower_effective * (1 - 1e-9));
}

TEST_CASE("superstability margins") {
    auto p = Potential::pure_repulsive(1, 1.0, 2.0);
    CubeGrid g(0.5, 1);
    StabilityConstants c = stability_constants(p, g);
    CHECK(check_superstability(c, p, g, {}) == 0.0);
    CHECK(check_superstability(c, p, g, {pt(0.1)}) == c.B_local);

    auto q = Potential::power_core_with_tail(1, 1.0, 4.0, 0.1, 1.0);
    GlobalBounds gb = global_bounds(q);
    CubeGrid gq(0.5 * gb.a_m, 1);
    StabilityConstants cq = stability_constants(q, gq);
    std::mt19937_64 rng(21);
    Region r = Region::box(gq, {20});
    double lo = gq.corner(r.cubes().front())[0];
    for (int t = 0; t < 2000; ++t) {
        Configuration gam = random_config(rng, static_cast<int>(rng() % 40), 1, 20 * gq.a);
        for (auto& x : gam) x[0] += lo;
        CHECK(check_superstability(cq, q, gq, gam) >= 0.0);
        CHECK(total_energy(q, gam) >= -gb.B_global * gam.size());
    }
}
