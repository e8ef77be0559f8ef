#include <cmath>

#include "doctest.h"
#include "qla/errors.hpp"
#include "qla/partition.hpp"
#include "qla/random.hpp"

using namespace qla;

namespace {

Potential ideal(int d = 1) { return Potential::zero(d, TestOnly{}); }
Potential rep() { return Potential::pure_repulsive(1, 1.0, 2.0); }

bool within(const Estimate& e, double truth, double extra = 0.0) {
    return std::fabs(e.value - truth) <= e.trunc_bound + 3.0 * e.stat_err + extra;
}

// Composite Simpson over [lo, hi]^n of e^{-U}, n <= 3, with `m` intervals per axis.
double simpson_cube(const Potential& p, double lo, double hi, int n, int m) {
    double h = (hi - lo) / m;
    std::vector<double> w(m + 1), x(m + 1);
    for (int i = 0; i <= m; ++i) {
        x[i] = lo + i * h;
        w[i] = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        w[i] *= h / 3.0;
    }
    auto phi = [&](double a, double b) { return a == b ? INFINITY : p.eval(std::fabs(a - b)); };
    double s = 0.0;
    if (n == 1) return hi - lo;
    for (int i = 0; i <= m; ++i)
        for (int j = 0; j <= m; ++j) {
            double u2 = phi(x[i], x[j]);
            if (n == 2) {
                s += w[i] * w[j] * std::exp(-u2);
                continue;
            }
            for (int k = 0; k <= m; ++k) s += w[i] * w[j] * w[k] * std::exp(-(u2 + phi(x[i], x[k]) + phi(x[j], x[k])));
        }
    return s;
}

}  // namespace

TEST_CASE("z_grand ideal gas and z = 0") {
    Region r = Region::box(CubeGrid(0.5, 1), {4});  // |Lambda| = 2
    Estimate e = z_grand(ideal(), r, {0.5, 1.0}, 12, 1000, 1);
    CHECK(e.stat_err == 0.0);
    CHECK(within(e, std::exp(1.0), 1e-13));
    CHECK(e.trunc_bound < 1e-9);
    Estimate z0 = z_grand(rep(), r, {0.0, 1.0}, 5, 1000, 1);
    CHECK(z0.value == 1.0);
    CHECK(z0.stat_err == 0.0);
}

TEST_CASE("z_grand matches nested Simpson oracle") {
    // Lambda = [-0.25, 1.75], length 2
    Region r = Region::box(CubeGrid(0.5, 1), {4});
    const double z = 0.5;
    double oracle = 1.0 + z * 2.0 + z * z / 2.0 * simpson_cube(rep(), -0.25, 1.75, 2, 200) +
                    z * z * z / 6.0 * simpson_cube(rep(), -0.25, 1.75, 3, 200);
    Estimate e = z_grand(rep(), r, {z, 1.0}, 3, 200000, 42);
    CHECK(std::fabs(e.value - oracle) <= 3.0 * e.stat_err + 1e-6);
    CHECK(e.stat_err < 1e-2);
}

TEST_CASE("z_grand is nondecreasing in z") {
    Region r = Region::box(CubeGrid(0.5, 1), {4});
    double prev = 0.0;
    for (double z : {0.1, 0.3, 0.6, 1.0}) {
        double v = z_grand(rep(), r, {z, 1.0}, -1, 20000, 3).value;
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("z_dilute ideal gas") {
    Region r = Region::box(CubeGrid(0.5, 1), {4});
    Budget b;
    for (DiluteMode m : {DiluteMode::enumerate, DiluteMode::monte_carlo}) {
        Estimate e = z_dilute(ideal(), r, {1.0, 1.0}, m, b);
        CHECK(e.value == doctest::Approx(5.0625).epsilon(1e-13));
        CHECK(e.stat_err == 0.0);
    }
    Budget b1;
    b1.quad_nodes = 1;
    Region big = Region::box(CubeGrid(0.125, 1), {16});
    Estimate e = z_dilute(ideal(), big, {0.7, 1.0}, DiluteMode::enumerate, b1);
    CHECK(std::fabs(e.value / std::pow(1.0 + 0.7 * 0.125, 16) - 1.0) < 1e-12);
    CHECK(z_dilute(rep(), r, {0.0, 1.0}, DiluteMode::enumerate, b).value == 1.0);
    Region r30 = Region::box(CubeGrid(0.1, 1), {30});
    CHECK_THROWS_AS(z_dilute(rep(), r30, {0.5, 1.0}, DiluteMode::enumerate, b), SizeError);
}

TEST_CASE("z_dilute matches chi_minus rejection oracle") {
    Region r = Region::box(CubeGrid(0.5, 1), {6});
    EnsembleParams ens{0.5, 1.0};
    Budget b;
    b.samples = 100000;
    Estimate en = z_dilute(rep(), r, ens, DiluteMode::enumerate, b);
    Estimate mc = z_dilute(rep(), r, ens, DiluteMode::monte_carlo, b);
    Budget ob;
    ob.samples = 100000;
    ob.seed = 99;
    Estimate oracle = uniform_series(rep(), r, ens, {}, ob, 0.0, stream_tag("oracle"),
                                     [&](const Configuration& c) { return chi_minus(r, c) == 1; });
    double tol = 3.0 * std::hypot(oracle.stat_err, en.stat_err) + en.trunc_bound + oracle.trunc_bound;
    CHECK(std::fabs(en.value - oracle.value) <= tol);
    CHECK(std::fabs(mc.value - en.value) <= 3.0 * mc.stat_err + en.trunc_bound);
    CHECK(en.trunc_bound < 1e-4 * en.value);
    CHECK(en.value >= 1.0);
    Estimate zg = z_grand(rep(), r, ens, -1, 50000, 5);
    CHECK(en.value <= zg.value + 3 * zg.stat_err);
}

TEST_CASE("z_plus ideal gas") {
    Region r = Region::box(CubeGrid(1.0, 1), {1});
    Budget b;
    b.n_max = 30;
    Estimate e = z_plus(ideal(), r, {1.0, 1.0}, b);
    CHECK(e.value == doctest::Approx(std::exp(1.0) / 2.0).epsilon(1e-12));
    Estimate d = z_plus_direct(ideal(), r, {1.0, 1.0}, b);
    CHECK(d.value == doctest::Approx(std::exp(1.0) / 2.0).epsilon(1e-12));
    CHECK(z_plus(rep(), r, {0.0, 1.0}, b).value == 1.0);
}

TEST_CASE("z_plus direct and ratio paths agree") {
    Region r = Region::box(CubeGrid(0.5, 1), {4});
    EnsembleParams ens{0.5, 1.0};
    Budget b;
    b.samples = 100000;
    Estimate ratio = z_plus(rep(), r, ens, b);
    Estimate direct = z_plus_direct(rep(), r, ens, b);
    double tol = 3.0 * std::hypot(ratio.stat_err, direct.stat_err) + ratio.trunc_bound + direct.trunc_bound;
    CHECK(std::fabs(ratio.value - direct.value) <= tol);
    CHECK(direct.value >= 1.0);
}

TEST_CASE("partition of unity reconstructs Z") {
    Region r = Region::box(CubeGrid(0.5, 1), {4});
    EnsembleParams ens{0.5, 1.0};
    Budget b;
    b.samples = 20000;
    Estimate pu = z_partition_of_unity(rep(), r, ens, b);
    Estimate zg = z_grand(rep(), r, ens, -1, 100000, 77);
    CHECK(std::fabs(pu.value - zg.value) <= 3.0 * std::hypot(pu.stat_err, zg.stat_err) + pu.trunc_bound + zg.trunc_bound);
}

TEST_CASE("epsilon1") {
    StabilityConstants c;
    c.a = 1.0;
    c.b = 4.0;
    c.v0 = 0.0;
    Epsilon1 e = epsilon1(c, {1.0, 1.0}, 1);
    // independent arithmetic: 0.5 e^-4 exp(e^-4)
    double expect = 0.5 * 0.018315638888734179 * 1.0184843989442722;
    CHECK(e.closed == doctest::Approx(expect).epsilon(1e-14));
    CHECK(e.closed == doctest::Approx(0.0093277).epsilon(1e-4));
    CHECK(epsilon1(c, {0.0, 1.0}, 1).closed == 0.0);
    // closed form bounds the series when b >= 4 v0
    for (double z : {0.1, 0.5, 1.0, 3.0})
        for (double beta : {0.5, 1.0, 2.0})
            for (double a : {0.1, 0.3, 0.7})
                for (double v0 : {0.0, 0.1, 0.5})
                    for (double b : {4.0 * v0 + 0.01, 2.0, 10.0}) {
                        if (b < 4.0 * v0) continue;
                        StabilityConstants k;
                        k.a = a;
                        k.b = b;
                        k.v0 = v0;
                        Epsilon1 x = epsilon1(k, {z, beta}, 1);
                        CHECK(x.series <= x.closed * (1.0 + 1e-12));
                    }
}

TEST_CASE("pressures ideal gas") {
    Region r = Region::box(CubeGrid(0.5, 1), {8});
    Budget b;
    b.samples = 2000;
    auto rows = pressures(ideal(), {r}, {1.0, 1.0}, b);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].p_minus == doctest::Approx(2.0 * std::log(1.5)).epsilon(1e-12));
    CHECK(rows[0].p_full == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rows[0].p_plus == doctest::Approx(1.0 - 2.0 * std::log(1.5)).epsilon(1e-10));
    CHECK(rows[0].p_minus_err == 0.0);

    // p^- -> z/beta with gap ~ z^2 a^d / 2
    const double z = 0.5;
    std::vector<Region> seq;
    for (double a : {0.4, 0.2, 0.1, 0.05}) seq.push_back(box_of_length(a, 1, 2.0));
    auto sweep = pressures(ideal(), seq, {z, 1.0}, b);
    for (const auto& row : sweep) {
        double ratio = (z - row.p_minus) / (z * z * row.a / 2.0);
        CHECK(std::fabs(ratio - 1.0) <= 2.0 * z * row.a);
    }
}

TEST_CASE("pressures repulsive are deterministic across workers") {
    std::vector<Region> seq{box_of_length(0.4, 1, 4.0), box_of_length(0.2, 1, 4.0)};
    Budget b1;
    b1.samples = 20000;
    b1.seed = 5;
    Budget b3 = b1;
    b3.workers = 3;
    auto r1 = pressures(rep(), seq, {0.5, 1.0}, b1);
    auto r3 = pressures(rep(), seq, {0.5, 1.0}, b3);
    for (std::size_t i = 0; i < r1.size(); ++i) {
        CHECK(r1[i].p_full == r3[i].p_full);
        CHECK(r1[i].p_plus == r3[i].p_plus);
        CHECK(r1[i].p_plus_err == r3[i].p_plus_err);
        CHECK(r1[i].bound_ok);
    }
    CHECK(r1[1].p_plus < r1[0].p_plus);
    CHECK_THROWS_AS(box_of_length(0.3, 1, 1.0), PreconditionError);
}

TEST_CASE("pressure estimators agree with z_grand") {
    Region r = Region::box(CubeGrid(0.5, 1), {6});
    EnsembleParams ens{0.5, 1.0};
    Budget b;
    b.samples = 100000;
    auto row = pressures(rep(), {r}, ens, b)[0];
    Estimate zg = z_grand(rep(), r, ens, -1, 100000, 8);
    double z_split = row.z_minus.value + row.z_excess.value;
    double tol = 3.0 * std::hypot(zg.stat_err, std::hypot(row.z_minus.stat_err, row.z_excess.stat_err)) +
                 zg.trunc_bound + row.z_minus.trunc_bound;
    CHECK(std::fabs(z_split - zg.value) <= tol);
}
