#include "qla/partition.hpp"

#include <cmath>

#include "qla/errors.hpp"
#include "qla/random.hpp"

namespace qla {
namespace {

double hypot2(double a, double b) { return std::sqrt(a * a + b * b); }

std::vector<int> slots_of_mask(unsigned mask, std::size_t n) {
    std::vector<int> s;
    for (std::size_t i = 0; i < n; ++i)
        if (mask >> i & 1U) s.push_back(static_cast<int>(i));
    return s;
}

// Same zero-truncation rule for every restricted series so their tails
// add up to at most the tail of the unrestricted one.
int fixed_n_max(const Region& region, const EnsembleParams& ens, double B) {
    double xb = ens.z * region.volume() * std::exp(ens.beta * B);
    int n = 0;
    while (n < 400 && std::exp(xb) * poisson_mass(xb, n + 1, -1) > 1e-7) ++n;
    return n;
}

}  // namespace

Estimate z_grand(const Potential& p, const Region& region, const EnsembleParams& ens, int n_max,
                 std::size_t samples, std::uint64_t seed, int workers) {
    Budget b;
    b.n_max = n_max;
    b.samples = samples;
    b.seed = seed;
    b.workers = workers;
    return uniform_series(p, region, ens, {}, b, stability_B(p), stream_tag("z_grand"));
}

Estimate z_dilute(const Potential& p, const Region& region, const EnsembleParams& ens, DiluteMode mode,
                  const Budget& budget) {
    return dilute_integral(p, region, ens, {}, budget, mode, stream_tag("z_dilute"));
}

Estimate z_plus(const Potential& p, const Region& region, const EnsembleParams& ens, const Budget& budget) {
    Estimate zg = z_grand(p, region, ens, budget.n_max, budget.samples, budget.seed, budget.workers);
    Estimate zm = z_dilute(p, region, ens, DiluteMode::automatic, budget);
    if (!(zm.value > 0)) throw DomainError("Z^- estimate is not positive");
    Estimate e;
    e.method = Method::monte_carlo;
    e.value = zg.value / zm.value;
    e.stat_err = e.value * hypot2(zg.stat_err / zg.value, zm.stat_err / zm.value);
    e.trunc_bound = zg.trunc_bound / zm.value + e.value * zm.trunc_bound / zm.value;
    e.warning = zg.warning;
    return e;
}

Estimate z_plus_direct(const Potential& p, const Region& region, const EnsembleParams& ens,
                       const Budget& budget) {
    const std::size_t n = region.size();
    if (n > 16) throw SizeError("direct Z^+ sums 2^N dense sets; limited to 16 cubes");
    Estimate zm = z_dilute(p, region, ens, DiluteMode::automatic, budget);
    double sum = 0.0, var = 0.0;
    const std::uint64_t tag = stream_tag("z_plus_direct");
    for (unsigned mask = 1; mask < (1U << n); ++mask) {
        Estimate ix = dense_set_integral(p, region, ens, {}, slots_of_mask(mask, n), budget, splitmix64(tag ^ mask));
        sum += ix.value;
        var += ix.stat_err * ix.stat_err;
    }
    Estimate e;
    e.method = Method::monte_carlo;
    double r = sum / zm.value;
    e.value = 1.0 + r;
    e.stat_err = hypot2(std::sqrt(var) / zm.value, r * zm.stat_err / zm.value);
    e.trunc_bound = r * zm.trunc_bound / zm.value;
    return e;
}

Estimate z_partition_of_unity(const Potential& p, const Region& region, const EnsembleParams& ens,
                              const Budget& budget) {
    const std::size_t n = region.size();
    if (n > 10) throw SizeError("partition-of-unity check sums 2^N assignments; limited to 10 cubes");
    double B = stability_B(p);
    Budget b = budget;
    if (b.n_max < 0) b.n_max = fixed_n_max(region, ens, B);
    const std::uint64_t tag = stream_tag("partition_of_unity");
    Estimate e;
    e.method = Method::monte_carlo;
    double var = 0.0;
    for (unsigned mask = 0; mask < (1U << n); ++mask) {
        auto filter = [&](const Configuration& cfg) {
            std::vector<int> cnt(n, 0);
            for (const auto& x : cfg) ++cnt[region.slot_of_point(x)];
            for (std::size_t i = 0; i < n; ++i) {
                bool dense = cnt[i] >= 2;
                if (dense != static_cast<bool>(mask >> i & 1U)) return false;
            }
            return true;
        };
        Estimate ex = uniform_series(p, region, ens, {}, b, B, splitmix64(tag ^ mask), filter);
        e.value += ex.value;
        var += ex.stat_err * ex.stat_err;
        e.trunc_bound = ex.trunc_bound;  // same n_max everywhere: the restricted tails sum to this
    }
    e.stat_err = std::sqrt(var);
    return e;
}

Epsilon1 epsilon1(const StabilityConstants& c, const EnsembleParams& ens, int d) {
    Epsilon1 e;
    if (ens.z == 0.0) return e;
    const double x = ens.z * std::pow(c.a, d);
    const double beta = ens.beta;
    e.closed = 0.5 * x * x * std::exp(-beta * (c.b - 5.0 * c.v0)) * std::exp(x * std::exp(-beta * (c.b - 3.0 * c.v0)));
    double term_log_fact = 0.0;
    for (int n = 2; n < 10000; ++n) {
        if (n == 2) term_log_fact = std::log(2.0);
        else term_log_fact += std::log(static_cast<double>(n));
        double lt = n * std::log(x) - term_log_fact - 0.25 * beta * (c.b - 2.0 * c.v0) * n * n + 1.5 * beta * c.v0 * n;
        double t = std::exp(lt);
        e.series += t;
        if (t < 1e-30 && n > 2 + x) break;
    }
    return e;
}

Region box_of_length(double a, int d, double length) {
    double ratio = length / a;
    auto n = static_cast<std::int64_t>(std::llround(ratio));
    if (n < 1 || std::fabs(n * a - length) > 1e-9 * length)
        throw PreconditionError("region length is not a whole number of cubes at this edge");
    return Region::box(CubeGrid(a, d), std::vector<std::int64_t>(d, n));
}

std::vector<PressureRow> pressures(const Potential& p, const std::vector<Region>& regions,
                                   const EnsembleParams& ens, const Budget& budget, DiluteMode mode) {
    std::vector<PressureRow> rows;
    const std::uint64_t tag_m = stream_tag("pressure_dilute"), tag_d = stream_tag("pressure_excess");
    for (std::size_t i = 0; i < regions.size(); ++i) {
        const Region& reg = regions[i];
        const CubeGrid& g = reg.grid();
        PressureRow r;
        r.a = g.a;
        r.n_cubes = reg.size();
        r.volume = reg.volume();
        StabilityConstants c = stability_constants(p, g);
        Epsilon1 eps = epsilon1(c, ens, g.d);
        r.eps1 = eps.closed;
        r.eps1_series = eps.series;
        r.bound = std::log1p(eps.closed) / (ens.beta * g.cube_volume());

        r.z_minus = dilute_integral(p, reg, ens, {}, budget, mode, splitmix64(tag_m ^ i));
        r.z_excess = nondilute_integral(p, reg, ens, {}, budget, splitmix64(tag_d ^ i));
        const double zm = r.z_minus.value, d = r.z_excess.value, z = zm + d;
        const double sm = hypot2(r.z_minus.stat_err, r.z_minus.trunc_bound), sd = r.z_excess.stat_err;
        const double k = 1.0 / (ens.beta * r.volume);
        r.p_full = k * std::log(z);
        r.p_full_err = k * hypot2(sm, sd) / z;
        r.p_minus = k * std::log(zm);
        r.p_minus_err = k * sm / zm;
        r.p_plus = k * std::log1p(d / zm);
        r.p_plus_err = k * hypot2(sd / z, d / (zm * z) * sm);
        r.bound_ok = r.p_plus <= r.bound + 3.0 * r.p_plus_err;
        rows.push_back(r);
    }
    return rows;
}

double eps1_slope(const std::vector<PressureRow>& rows, double s) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& r : rows) {
        if (!(r.eps1 > 0)) continue;
        double x = std::pow(r.a, -s), y = std::log(r.eps1);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) return 0.0;
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace qla
