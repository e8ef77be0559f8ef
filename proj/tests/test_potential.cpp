#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "qla/errors.hpp"
#include "qla/potential.hpp"

using namespace qla;

namespace {

// Composite trapezoid for C(beta) in d=1 after r = t/(1-t), an oracle
// independent of the adaptive code path.
double trapezoid_c_beta_1d(const Potential& p, double beta, int n) {
    auto f = [&](double t) {
        if (t <= 0.0) return 1.0;
        if (t >= 1.0) t = 1.0 - 1e-9;
        double r = t / (1.0 - t);
        return std::fabs(std::expm1(-beta * p.eval(r))) / ((1.0 - t) * (1.0 - t));
    };
    double h = 1.0 / n, s = 0.5 * (f(0.0) + f(1.0));
    for (int i = 1; i < n; ++i) s += f(i * h);
    return 2.0 * s * h;
}

}  // namespace

TEST_CASE("eval examples") {
    CHECK(Potential::pure_repulsive(1, 1.0, 2.0).eval(2.0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(Potential::lennard_jones(3, 1.0, 1.0).eval(1.0) == 0.0);
    CHECK(Potential::power_core_with_tail(1, 1.0, 4.0, 1.0, 1.0).eval(1.0) == 0.0);
    CHECK(Potential::pure_repulsive(1, 1.0, 2.5).eval(1.7) == doctest::Approx(std::pow(1.7, -2.5)).epsilon(1e-14));
    CHECK_THROWS_AS(Potential::pure_repulsive(1, 1.0, 2.0).eval(0.0), DomainError);
    CHECK_THROWS_AS(Potential::pure_repulsive(1, 1.0, 2.0).eval(-1.0), DomainError);
}

TEST_CASE("split examples") {
    auto lj = Potential::lennard_jones(3, 1.0, 1.0).split(std::pow(2.0, 1.0 / 6.0));
    CHECK(lj.first == 0.0);
    CHECK(lj.second == doctest::Approx(1.0).epsilon(1e-14));
    auto pr = Potential::pure_repulsive(2, 1.0, 3.0).split(0.7);
    CHECK(pr.first == doctest::Approx(std::pow(0.7, -3.0)));
    CHECK(pr.second == 0.0);
    // r^-4 - r^-2 at r = 2 is 1/16 - 1/4
    auto pc = Potential::power_core_with_tail(1, 1.0, 4.0, 1.0, 1.0).split(2.0);
    CHECK(pc.first == 0.0);
    CHECK(pc.second == doctest::Approx(0.1875).epsilon(1e-15));
}

TEST_CASE("split reconstructs eval on random radii") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (const auto& p : {Potential::lennard_jones(3, 1.3, 0.8), Potential::power_core_with_tail(2, 2.0, 7.0, 0.5, 0.5),
                          Potential::pure_repulsive(1, 1.0, 2.0)}) {
        for (int i = 0; i < 1000; ++i) {
            double r = std::pow(10.0, u(rng));
            auto [pl, mi] = p.split(r);
            CHECK(pl >= 0.0);
            CHECK(mi >= 0.0);
            CHECK(pl - mi == p.eval(r));
        }
    }
}

TEST_CASE("family invariants") {
    CHECK_THROWS_AS(Potential::power_core_with_tail(1, 1.0, 2.0, 1.0, 1.0), PreconditionError);
    CHECK_THROWS_AS(Potential::make(Family::zero, 1, {}), PreconditionError);
    CHECK(Potential::make(Family::zero, 1, {}, TestOnly{}).eval(0.3) == 0.0);
    CHECK(family_from_name("lennard-jones") == Family::lennard_jones);
    CHECK_THROWS_AS(family_from_name("morse"), ConfigError);
}

TEST_CASE("well and sup of phi-") {
    auto lj = Potential::lennard_jones(3, 1.0, 1.0);
    CHECK(*lj.well() == doctest::Approx(std::pow(2.0, 1.0 / 6.0)).epsilon(1e-14));
    CHECK(lj.sup_phi_minus(1.0, 2.0) == doctest::Approx(1.0));
    CHECK(lj.sup_phi_minus(1.5, 2.0) == doctest::Approx(lj.split(1.5).second));
    CHECK(lj.sup_phi_minus(0.5, 1.0) == 0.0);
    // dense scan oracle
    double best = 0.0;
    for (int i = 0; i <= 100000; ++i) best = std::max(best, lj.split(1.05 + 0.2 * i / 100000.0).second);
    CHECK(lj.sup_phi_minus(1.05, 1.25) == doctest::Approx(best).epsilon(1e-9));
    CHECK(Potential::pure_repulsive(1, 1.0, 2.0).inf_phi_plus(0.5) == doctest::Approx(4.0));
}

TEST_CASE("certify pure-repulsive") {
    auto c = certify_assumption_a(Potential::pure_repulsive(3, 1.0, 12.0));
    CHECK(c.r0 == 1.0);
    CHECK(c.R == 2.0);
    CHECK(c.phi0 == 1.0);
    CHECK(c.eps0 == 1.0);
    CHECK(c.s == 12.0);
}

TEST_CASE("certify lennard-jones") {
    auto p = Potential::lennard_jones(3, 1.0, 1.0);
    auto c = certify_assumption_a(p);
    CHECK(c.s == 12.0);
    CHECK(c.r0 == doctest::Approx(0.9));
    CHECK(c.R == doctest::Approx(1.5));
    CHECK(c.eps0 == 3.0);
    // r^12 phi = 4(1 - r^6) is smallest at r0
    CHECK(c.phi0 == doctest::Approx(0.95 * 4.0 * (1.0 - std::pow(0.9, 6))).epsilon(1e-12));
    CHECK(c.phi1 == doctest::Approx(1.05 * 4.0).epsilon(1e-12));
    for (int i = 0; i < 10000; ++i) {
        double t = i / 9999.0;
        double rc = c.r0 * std::pow(1e-3, t), rt = c.R * std::pow(1e3, t);
        CHECK(p.eval(rc) >= c.phi0 * std::pow(rc, -c.s));
        CHECK(p.eval(rt) >= -c.phi1 * std::pow(rt, -3.0 - c.eps0));
    }
}

TEST_CASE("certify power-core and rejects") {
    auto c = certify_assumption_a(Potential::power_core_with_tail(1, 1.0, 4.0, 0.1, 1.0));
    CHECK(c.r0 < c.R);
    CHECK(c.phi0 > 0.0);
    CHECK(c.phi1 >= 0.1);
    CHECK_THROWS_AS(certify_assumption_a(Potential::zero(1, TestOnly{})), CertificationError);
    CHECK_THROWS_AS(certify_assumption_a(Potential::pure_repulsive(3, 1.0, 2.0)), CertificationError);
}

TEST_CASE("mayer C(beta)") {
    auto hc = Potential::hard_core(1, 0.5, TestOnly{});
    CHECK(std::fabs(mayer_c_beta(hc, 1.0).value - 1.0) <= 1e-8);

    auto pr = Potential::pure_repulsive(1, 1.0, 2.0);
    Estimate c = mayer_c_beta(pr, 1.0, 1e-9);
    CHECK(c.trunc_bound <= 1e-8);
    // 2 * int (1 - e^{-1/r^2}) dr = 2 sqrt(pi)
    CHECK(c.value == doctest::Approx(2.0 * std::sqrt(std::numbers::pi)).epsilon(1e-9));
    CHECK(c.value == doctest::Approx(trapezoid_c_beta_1d(pr, 1.0, 2000000)).epsilon(1e-7));
    // small-beta limit: C = 2 sqrt(pi beta) for this instance
    CHECK(mayer_c_beta(pr, 1e-8).value == doctest::Approx(2.0 * std::sqrt(std::numbers::pi * 1e-8)).epsilon(1e-8));
    CHECK(mayer_c_beta(pr, 1e-8).value <= 1e-3);
    CHECK(mayer_c_beta(Potential::pure_repulsive(1, 1.0, 1.5), 1e-12).value <= 1e-4);

    double prev = 0.0;
    for (double beta : {0.1, 0.5, 1.0, 2.0, 4.0}) {
        double v = mayer_c_beta(pr, beta).value;
        CHECK(v > prev);
        prev = v;
    }

    auto pc = Potential::power_core_with_tail(1, 1.0, 4.0, 0.1, 1.0);
    CHECK(mayer_c_beta(pc, 1.0).value == doctest::Approx(trapezoid_c_beta_1d(pc, 1.0, 4000000)).epsilon(1e-6));
    CHECK(mayer_c_beta(Potential::zero(1, TestOnly{}), 1.0).value == 0.0);
    CHECK_THROWS_AS(mayer_c_beta(Potential::pure_repulsive(1, 1.0, 1.0), 1.0), PreconditionError);
}

TEST_CASE("mayer C(beta) in three dimensions") {
    // radial trapezoid oracle, 4 pi int |e^{-phi}-1| r^2 dr
    auto lj = Potential::lennard_jones(3, 1.0, 1.0);
    double h = 1e-5, s = 0.0;
    for (int i = 1; i < 5000000; ++i) {
        double r = i * h;
        s += std::fabs(std::expm1(-lj.eval(r))) * r * r;
    }
    // beyond r = 50, |e^{-phi}-1| ~ 4 r^-6
    double tail = 4.0 * std::numbers::pi * 4.0 / (3.0 * std::pow(50.0, 3));
    double oracle = 4.0 * std::numbers::pi * s * h + tail;
    CHECK(mayer_c_beta(lj, 1.0).value == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("phi- integral") {
    // 2 * int_1^inf (r^-2 - r^-4) dr = 2 (1 - 1/3)
    auto pc = Potential::power_core_with_tail(1, 1.0, 4.0, 1.0, 1.0);
    Estimate e = phi_minus_integral(pc);
    CHECK(e.value == doctest::Approx(4.0 / 3.0).epsilon(1e-9));
    CHECK(phi_minus_integral(Potential::pure_repulsive(1, 1.0, 2.0)).value == 0.0);
}

TEST_CASE("activity radius") {
    CHECK(activity_radius(1.0, 1.0, 0.0) == doctest::Approx(0.36787944117144233));
    CHECK(activity_radius(2.0, 1.0, 0.0) == doctest::Approx(0.36787944117144233 / 2.0));
    CHECK(activity_radius(1.0, 1.0, 1.0) == doctest::Approx(std::exp(-3.0)));
    CHECK(std::isinf(activity_radius(0.0, 1.0, 0.0)));
}
