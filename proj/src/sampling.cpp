#include "qla/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "qla/energy.hpp"
#include "qla/errors.hpp"
#include "qla/parallel.hpp"
#include "qla/quadrature.hpp"
#include "qla/random.hpp"

namespace qla {
namespace {

constexpr double kUnderflow = 745.2;  // exp(-x) == 0 beyond this
constexpr double kOverflow = 700.0;

// Poisson(x) conditioned on lo <= k <= hi, sampled from a precomputed table.
class TruncPoisson {
public:
    TruncPoisson() = default;
    TruncPoisson(double x, int lo, int hi) : lo_(lo) {
        mass_ = poisson_mass(x, lo, hi);
        if (mass_ <= 0.0) return;
        double pk = std::exp(-x);
        for (int k = 0; k < lo; ++k) pk *= x / (k + 1);
        double acc = 0.0;
        for (int k = lo; hi < 0 || k <= hi; ++k) {
            acc += pk / mass_;
            cdf_.push_back(std::min(acc, 1.0));
            if (hi < 0 && (pk / mass_ < 1e-18 && k > x)) break;
            pk *= x / (k + 1);
            if (k > lo + 10000) break;
        }
        cdf_.back() = 1.0;
    }
    double mass() const { return mass_; }  // probability of the range
    int sample(double u) const {
        std::size_t i = 0;
        while (i + 1 < cdf_.size() && u >= cdf_[i]) ++i;
        return lo_ + static_cast<int>(i);
    }

private:
    int lo_ = 0;
    double mass_ = 0.0;
    std::vector<double> cdf_;
};

struct Range {
    int lo = 0;
    int hi = -1;
    bool operator<(const Range& o) const { return lo != o.lo ? lo < o.lo : hi < o.hi; }
};

bool range_empty(const Range& r) { return r.hi >= 0 && r.hi < r.lo; }

// eta points per region slot; throws if eta leaves the region.
std::vector<int> eta_counts(const Region& region, const Configuration& eta) {
    std::vector<int> m(region.size(), 0);
    for (const auto& x : eta) {
        long s = region.slot_of_point(x);
        if (s < 0) throw PreconditionError("eta must lie inside the region");
        ++m[s];
    }
    return m;
}

void add_uniform_point(const Region& region, std::size_t slot, Stream& rng, Configuration& out) {
    const CubeGrid& g = region.grid();
    Point x = g.corner(region.cubes()[slot]);
    for (int k = 0; k < g.d; ++k) x[k] += g.a * rng.uniform();
    out.push_back(x);
}

void check_ensemble(const EnsembleParams& ens) {
    if (!(ens.z >= 0) || !(ens.beta > 0)) throw PreconditionError("need z >= 0 and beta > 0");
}

Estimate scaled(const MeanVar& mv, double log_mass, Method method) {
    if (log_mass > kOverflow) throw SizeError("partition function overflows double range");
    Estimate e;
    e.method = method;
    double m = std::exp(log_mass);
    e.value = m * mv.mean;
    e.stat_err = m * mv.sem();
    return e;
}

// Product-law sampler: each cube draws its count from its own range.
Estimate ranges_integral(const Potential& p, const Region& region, const EnsembleParams& ens,
                         const Configuration& eta, const std::vector<Range>& ranges, const Budget& budget,
                         std::uint64_t tag) {
    check_ensemble(ens);
    const double x = ens.z * region.grid().cube_volume();
    std::map<Range, TruncPoisson> laws;
    double log_mass = 0.0;
    for (const auto& r : ranges) {
        if (range_empty(r)) return Estimate{0.0, 0.0, 0.0, Method::monte_carlo, ""};
        auto it = laws.find(r);
        if (it == laws.end()) it = laws.emplace(r, TruncPoisson(x, r.lo, r.hi)).first;
        if (it->second.mass() <= 0.0) return Estimate{0.0, 0.0, 0.0, Method::monte_carlo, ""};
        log_mass += x + std::log(it->second.mass());
    }
    std::vector<const TruncPoisson*> law(ranges.size());
    for (std::size_t i = 0; i < ranges.size(); ++i) law[i] = &laws.at(ranges[i]);

    MeanVar mv = run_chunks<MeanVar>(budget.samples, budget.workers, [&](std::size_t chunk, std::size_t count) {
        Stream rng(budget.seed, {tag, chunk});
        MeanVar acc;
        Configuration cfg;
        for (std::size_t s = 0; s < count; ++s) {
            cfg.assign(eta.begin(), eta.end());
            for (std::size_t i = 0; i < law.size(); ++i) {
                int n = law[i]->sample(rng.uniform());
                for (int k = 0; k < n; ++k) add_uniform_point(region, i, rng, cfg);
            }
            acc.add(boltzmann(p, ens.beta, cfg));
        }
        return acc;
    });
    return scaled(mv, log_mass, Method::monte_carlo);
}

// Depth-first tensor Gauss-Legendre sum over dilute placements.
class DiluteEnumerator {
public:
    DiluteEnumerator(const Potential& p, const Region& region, const EnsembleParams& ens,
                     const Configuration& eta, int m)
        : p_(p), beta_(ens.beta), pts_(eta) {
        const CubeGrid& g = region.grid();
        std::vector<int> cnt = eta_counts(region, eta);
        for (std::size_t slot = 0; slot < region.size(); ++slot) {
            if (cnt[slot]) continue;
            std::vector<Node> nodes;
            for (const auto& wp : cube_rule(g, region.cubes()[slot], m)) nodes.push_back({wp.x, ens.z * wp.w});
            cubes_.push_back(std::move(nodes));
        }
    }

    double work() const {
        double w = 1.0;
        for (const auto& c : cubes_) w *= 1.0 + static_cast<double>(c.size());
        return w;
    }

    double run(double start) {
        sum_ = 0.0;
        comp_ = 0.0;
        if (start != 0.0) dfs(0, start);
        return sum_ + comp_;
    }

private:
    struct Node {
        Point x;
        double zw;
    };

    void dfs(std::size_t i, double w) {
        if (i == cubes_.size()) {
            // Neumaier summation; the leaf count can reach the work cap
            double t = sum_ + w;
            comp_ += std::fabs(sum_) >= std::fabs(w) ? (sum_ - t) + w : (w - t) + sum_;
            sum_ = t;
            return;
        }
        dfs(i + 1, w);
        for (const Node& nd : cubes_[i]) {
            double du = 0.0;
            for (const auto& q : pts_) du += p_.eval_sq(dist2(nd.x, q));
            double w2 = w * nd.zw * std::exp(-beta_ * du);
            if (w2 == 0.0) continue;
            pts_.push_back(nd.x);
            dfs(i + 1, w2);
            pts_.pop_back();
        }
    }

    const Potential& p_;
    double beta_;
    Configuration pts_;
    std::vector<std::vector<Node>> cubes_;
    double sum_ = 0.0;
    double comp_ = 0.0;
};

int coarser_rule(int m) {
    switch (m) {
        case 2: return 1;
        case 3: return 2;
        case 4: return 2;
        case 5: return 3;
        case 6: return 3;
        case 8: return 4;
        case 10: return 5;
        case 12: return 6;
        case 16: return 8;
        case 20: return 10;
        default: return 0;
    }
}

}  // namespace

std::vector<WeightedPoint> cube_rule(const CubeGrid& g, const CubeIndex& cube, int m) {
    const Rule& rule = gauss_legendre(m);
    int n_nodes = 1;
    for (int k = 0; k < g.d; ++k) n_nodes *= m;
    const Point c = g.corner(cube);
    std::vector<WeightedPoint> out;
    out.reserve(n_nodes);
    for (int idx = 0; idx < n_nodes; ++idx) {
        WeightedPoint wp{c, 1.0};
        int rest = idx;
        for (int k = 0; k < g.d; ++k) {
            int j = rest % m;
            rest /= m;
            wp.x[k] += 0.5 * g.a * (rule.nodes[j] + 1.0);
            wp.w *= 0.5 * g.a * rule.weights[j];
        }
        out.push_back(wp);
    }
    return out;
}

double boltzmann(const Potential& p, double beta, const Configuration& g) {
    const bool early = p.nonnegative();
    double u = 0.0;
    for (std::size_t i = 1; i < g.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) u += p.eval_sq(dist2(g[i], g[j]));
        if (early && beta * u > kUnderflow) return 0.0;
    }
    return std::exp(-beta * u);
}

double stability_B(const Potential& p) {
    if (p.nonnegative()) return 0.0;
    return global_bounds(p).B_global;
}

Estimate uniform_series(const Potential& p, const Region& region, const EnsembleParams& ens,
                        const Configuration& eta, const Budget& budget, double B, std::uint64_t tag,
                        const std::function<bool(const Configuration&)>& filter) {
    check_ensemble(ens);
    eta_counts(region, eta);
    const double vol = region.volume();
    const std::size_t n_cubes = region.size();
    const double xb = ens.z * vol * std::exp(ens.beta * B);
    const double eta_fac = std::exp(ens.beta * B * static_cast<double>(eta.size()));
    Estimate e;
    e.method = Method::monte_carlo;
    double var = 0.0;
    const int cap = budget.n_max >= 0 ? budget.n_max : 400;
    int n = 0;
    for (; n <= cap; ++n) {
        double coef = n == 0 ? 1.0 : std::exp(n * std::log(ens.z * vol) - std::lgamma(n + 1.0));
        if (ens.z == 0.0 && n > 0) coef = 0.0;
        MeanVar mv;
        if (coef > 0.0) {
            std::size_t samples = n == 0 ? 1 : budget.samples;
            mv = run_chunks<MeanVar>(samples, budget.workers, [&](std::size_t chunk, std::size_t count) {
                Stream rng(budget.seed, {tag, static_cast<std::uint64_t>(n), chunk});
                MeanVar acc;
                Configuration cfg;
                for (std::size_t s = 0; s < count; ++s) {
                    cfg.assign(eta.begin(), eta.end());
                    for (int k = 0; k < n; ++k) add_uniform_point(region, rng.below(n_cubes), rng, cfg);
                    bool keep = !filter || filter(cfg);
                    acc.add(keep ? boltzmann(p, ens.beta, cfg) : 0.0);
                }
                return acc;
            });
        }
        e.value += coef * mv.mean;
        var += coef * coef * mv.sem() * mv.sem();
        double tail = ens.z == 0.0 ? 0.0 : eta_fac * std::exp(xb) * poisson_mass(xb, n + 1, -1);
        e.trunc_bound = tail;
        if (budget.n_max < 0 && tail < 1e-6 * e.value) break;
    }
    // a few ulps per coefficient and per accumulation step
    e.trunc_bound += 4.0 * (std::min(n, cap) + 1) * std::numeric_limits<double>::epsilon() * std::fabs(e.value);
    if (budget.n_max >= 0 && e.trunc_bound > 1e-6 * e.value) e.warning = "n_max leaves a truncation tail above 1e-6 of the sum";
    e.stat_err = std::sqrt(var);
    return e;
}

Estimate dilute_integral(const Potential& p, const Region& region, const EnsembleParams& ens,
                         const Configuration& eta, const Budget& budget, DiluteMode mode, std::uint64_t tag) {
    check_ensemble(ens);
    std::vector<int> cnt = eta_counts(region, eta);
    bool eta_dilute = std::all_of(cnt.begin(), cnt.end(), [](int c) { return c <= 1; });
    if (!eta_dilute) return Estimate{0.0, 0.0, 0.0, Method::enumeration, ""};

    DiluteEnumerator en(p, region, ens, eta, budget.quad_nodes);
    bool can_enumerate = region.size() <= 24 && en.work() <= budget.work_cap;
    if (mode == DiluteMode::enumerate && !can_enumerate)
        throw SizeError("dilute enumeration exceeds 24 cubes or the work cap; use monte-carlo mode");
    if (mode == DiluteMode::monte_carlo || (mode == DiluteMode::automatic && !can_enumerate)) {
        std::vector<Range> ranges(region.size());
        for (std::size_t i = 0; i < ranges.size(); ++i) ranges[i] = {0, 1 - cnt[i]};
        return ranges_integral(p, region, ens, eta, ranges, budget, tag);
    }
    Estimate e;
    double start = eta.empty() ? 1.0 : boltzmann(p, ens.beta, eta);
    e.value = en.run(start);
    if (p.family() == Family::zero) {
        e.method = Method::enumeration;
        return e;
    }
    e.method = Method::quadrature;
    int mc = coarser_rule(budget.quad_nodes);
    if (mc > 0) {
        DiluteEnumerator coarse(p, region, ens, eta, mc);
        e.trunc_bound = std::fabs(e.value - coarse.run(start));
    } else {
        e.warning = "no coarser rule for a quadrature error estimate";
    }
    return e;
}

Estimate nondilute_integral(const Potential& p, const Region& region, const EnsembleParams& ens,
                            const Configuration& eta, const Budget& budget, std::uint64_t tag) {
    check_ensemble(ens);
    std::vector<int> cnt = eta_counts(region, eta);
    const double x = ens.z * region.grid().cube_volume();
    const std::size_t N = region.size();
    std::vector<Range> good(N), bad(N);
    std::vector<double> g(N), b(N);
    double log_all_good = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        good[i] = {0, 1 - cnt[i]};
        bad[i] = {std::max(0, 2 - cnt[i]), -1};
        g[i] = range_empty(good[i]) ? 0.0 : poisson_mass(x, good[i].lo, good[i].hi);
        b[i] = poisson_mass(x, bad[i].lo, -1);
        log_all_good += g[i] > 0.0 ? std::log(g[i]) : -INFINITY;
    }
    double p_bad = -std::expm1(log_all_good);  // probability that some cube is bad
    if (p_bad <= 0.0) return Estimate{0.0, 0.0, 0.0, Method::monte_carlo, ""};
    // P(first bad cube = j) = prod_{i<j} g_i * b_j / p_bad
    std::vector<double> cum(N);
    double prefix = 1.0, acc = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
        acc += prefix * b[j];
        cum[j] = acc;
        prefix *= g[j];
    }
    const double total = acc;
    std::map<Range, TruncPoisson> laws;
    auto law = [&](const Range& r) -> const TruncPoisson& {
        auto it = laws.find(r);
        if (it == laws.end()) it = laws.emplace(r, TruncPoisson(x, r.lo, r.hi)).first;
        return it->second;
    };
    std::vector<const TruncPoisson*> lg(N), lb(N);
    for (std::size_t i = 0; i < N; ++i) {
        lg[i] = range_empty(good[i]) ? nullptr : &law(good[i]);
        lb[i] = &law(bad[i]);
    }
    const TruncPoisson& full = law({0, -1});
    double log_mass = x * static_cast<double>(N) + std::log(p_bad);

    MeanVar mv = run_chunks<MeanVar>(budget.samples, budget.workers, [&](std::size_t chunk, std::size_t count) {
        Stream rng(budget.seed, {tag, chunk});
        MeanVar a;
        Configuration cfg;
        for (std::size_t s = 0; s < count; ++s) {
            double u = rng.uniform() * total;
            std::size_t J = std::upper_bound(cum.begin(), cum.end(), u) - cum.begin();
            if (J >= N) J = N - 1;
            cfg.assign(eta.begin(), eta.end());
            for (std::size_t i = 0; i < N; ++i) {
                const TruncPoisson* l = i < J ? lg[i] : (i == J ? lb[i] : &full);
                int n = l->sample(rng.uniform());
                for (int k = 0; k < n; ++k) add_uniform_point(region, i, rng, cfg);
            }
            a.add(boltzmann(p, ens.beta, cfg));
        }
        return a;
    });
    return scaled(mv, log_mass, Method::monte_carlo);
}

Estimate dense_set_integral(const Potential& p, const Region& region, const EnsembleParams& ens,
                            const Configuration& eta, const std::vector<int>& dense, const Budget& budget,
                            std::uint64_t tag) {
    std::vector<int> cnt = eta_counts(region, eta);
    std::vector<char> in(region.size(), 0);
    for (int s : dense) in.at(s) = 1;
    std::vector<Range> ranges(region.size());
    for (std::size_t i = 0; i < ranges.size(); ++i)
        ranges[i] = in[i] ? Range{std::max(0, 2 - cnt[i]), -1} : Range{0, 1 - cnt[i]};
    return ranges_integral(p, region, ens, eta, ranges, budget, tag);
}

Estimate poisson_integral(const Potential& p, const Region& region, const EnsembleParams& ens,
                          const Configuration& eta, const Budget& budget, std::uint64_t tag) {
    eta_counts(region, eta);
    std::vector<Range> ranges(region.size(), Range{0, -1});
    return ranges_integral(p, region, ens, eta, ranges, budget, tag);
}

}  // namespace qla
