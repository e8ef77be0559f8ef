#include "qla/correlation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <memory>
#include <numeric>
#include <unordered_map>

#include "qla/energy.hpp"
#include "qla/errors.hpp"
#include "qla/parallel.hpp"
#include "qla/partition.hpp"
#include "qla/random.hpp"

namespace qla {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double hypot2(double a, double b) { return std::sqrt(a * a + b * b); }

// Linearised propagation for independent inputs.
Estimate propagate(double value, const std::vector<std::pair<double, const Estimate*>>& partials) {
    Estimate e;
    e.value = value;
    double var = 0.0;
    std::vector<Method> ms;
    for (const auto& [d, in] : partials) {
        var += d * in->stat_err * d * in->stat_err;
        e.trunc_bound += std::fabs(d) * in->trunc_bound;
        if (in->method == Method::monte_carlo) e.method = Method::monte_carlo;
        else if (in->method == Method::quadrature && e.method == Method::enumeration) e.method = Method::quadrature;
        if (!in->warning.empty() && e.warning.empty()) e.warning = in->warning;
    }
    e.stat_err = std::sqrt(var);
    return e;
}

void check_eta_in(const Region& region, const Configuration& eta) {
    for (const auto& x : eta)
        if (region.slot_of_point(x) < 0) throw PreconditionError("eta must lie inside the region");
}

double interaction(const Potential& p, const Configuration& eta, std::size_t i) {
    double w = 0.0;
    for (std::size_t j = 0; j < eta.size(); ++j)
        if (j != i) w += p.eval_sq(dist2(eta[i], eta[j]));
    return w;
}

std::vector<double> normalise_pi(const std::vector<double>& W, double B, bool* fallback) {
    const double floor = -2.0 * B - 1e-12 * std::max(1.0, 2.0 * std::fabs(B));
    std::vector<double> w(W.size(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < W.size(); ++i)
        if (W[i] >= floor) w[i] = 1.0, total += 1.0;
    if (fallback) *fallback = total == 0.0;
    if (total == 0.0) {
        std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(W.size()));
        return w;
    }
    for (double& x : w) x /= total;
    return w;
}

// Radial importance sampler for y - x with density close to |e^{-beta phi}-1|:
// piecewise-constant cells out to r_tail, then a Pareto cell. Returns the
// signed importance weight of int (e^{-beta phi(|y-x|)} - 1) g(y) dy.
class MayerSampler {
public:
    MayerSampler(const Potential& p, double beta, double cutoff) : p_(p), beta_(beta), d_(p.dim()) {
        area_ = sphere_area(d_);
        auto g = [&](double r) { return std::fabs(std::expm1(-beta_ * p_.eval(r))) * area_ * std::pow(r, d_ - 1); };
        // scan a log grid for the significant range
        std::vector<double> grid;
        for (double r = 1e-6; r <= 1e8; r *= 1.01) grid.push_back(r);
        std::size_t last_big = 0, last_any = 0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            double f = std::fabs(std::expm1(-beta_ * p_.eval(grid[i])));
            if (f > 1e-2) last_big = i;
            if (f >= 1e-8) last_any = i;
        }
        const double l0 = grid[std::min(last_big + 1, grid.size() - 1)];
        double rt = cutoff > 0 ? cutoff : grid[std::min(last_any + 1, grid.size() - 1)];
        rt = std::max(rt, l0);
        const int n_lin = 256;
        for (int i = 0; i < n_lin; ++i) edges_.push_back(l0 * i / n_lin);
        for (double r = l0; r < rt; r *= 1.02) edges_.push_back(r);
        edges_.push_back(rt);
        std::vector<double> mass(edges_.size() - 1);
        for (std::size_t i = 0; i + 1 < edges_.size(); ++i) {
            double lo = edges_[i], hi = edges_[i + 1], w = hi - lo;
            double lo_eval = lo > 0 ? lo : 1e-3 * hi;
            mass[i] = std::max({g(lo_eval), g(0.5 * (lo + hi)), g(hi)}) * w;
        }
        // Pareto tail r^{-(1+alpha)} beyond rt with alpha half the observed decay
        double g1 = g(rt), g2 = g(2.0 * rt);
        tail_mass_ = 0.0;
        if (g1 > 0.0 && g2 > 0.0) {
            double kappa = std::log(g1 / g2) / std::log(2.0) - 1.0;
            alpha_ = std::max(kappa, 0.05) / 2.0;
            tail_mass_ = g1 * rt / std::max(kappa, 0.05);
        }
        rt_ = rt;
        double total = std::accumulate(mass.begin(), mass.end(), 0.0) + tail_mass_;
        cdf_.resize(mass.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < mass.size(); ++i) {
            dens_.push_back(mass[i] / total / (edges_[i + 1] - edges_[i]));
            acc += mass[i] / total;
            cdf_[i] = acc;
        }
        p_tail_ = tail_mass_ / total;
        if (p_tail_ == 0.0) cdf_.back() = 1.0;
    }

    // Samples y around x; returns the signed weight.
    double sample(const Point& x, Stream& rng, Point& y) const {
        double u = rng.uniform();
        double r, q;
        if (u >= cdf_.back()) {
            double v = 1.0 - rng.uniform();  // (0, 1]
            r = rt_ * std::pow(v, -1.0 / alpha_);
            q = p_tail_ * alpha_ * std::pow(rt_, alpha_) * std::pow(r, -1.0 - alpha_);
        } else {
            std::size_t i = std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin();
            double lo = edges_[i], hi = edges_[i + 1];
            r = lo + (hi - lo) * (1.0 - rng.uniform());  // (lo, hi]
            q = dens_[i];
        }
        y = x;
        if (d_ == 1) {
            y[0] += rng.uniform() < 0.5 ? -r : r;
        } else if (d_ == 2) {
            double t = 2.0 * M_PI * rng.uniform();
            y[0] += r * std::cos(t);
            y[1] += r * std::sin(t);
        } else {
            double c = 2.0 * rng.uniform() - 1.0, t = 2.0 * M_PI * rng.uniform();
            double s = std::sqrt(std::max(0.0, 1.0 - c * c));
            y[0] += r * s * std::cos(t);
            y[1] += r * s * std::sin(t);
            y[2] += r * c;
        }
        if (q <= 0.0) return 0.0;
        return std::expm1(-beta_ * p_.eval(r)) * area_ * std::pow(r, d_ - 1) / q;
    }

private:
    const Potential& p_;
    double beta_;
    int d_;
    double area_ = 0.0;
    std::vector<double> edges_, dens_, cdf_;
    double rt_ = 0.0, alpha_ = 1.0, tail_mass_ = 0.0, p_tail_ = 0.0;
};

// Random-branch estimator of (K f)(eta): one point x drawn from pi~, one
// order k drawn with probability proportional to C^k/k!.
class ContinuumKS {
public:
    ContinuumKS(const Potential& p, const EnsembleParams& ens, double c, double B, const KSTruncation& trunc)
        : p_(p), beta_(ens.beta), c_(c), B_(B) {
        if (c_ > 0.0) sampler_ = std::make_unique<MayerSampler>(p, ens.beta, trunc.cutoff_radius);
    }

    // f(cfg) evaluated by `inner`; n_cap bounds the support of f.
    template <class Inner>
    double step(const Configuration& eta, int n_cap, Stream& rng, const Inner& inner, bool* fallback) const {
        const std::size_t m = eta.size();
        if (m == 0) return 0.0;
        if (m == 1) {
            int kmax = n_cap;
            if (c_ == 0.0 || kmax < 1) return 0.0;
            auto [k, S] = pick_order(1, kmax, rng);
            Configuration ys;
            double w = S * mayer_draws(eta[0], k, rng, ys);
            return w == 0.0 ? 0.0 : w * inner(ys);
        }
        std::vector<double> W(m);
        for (std::size_t i = 0; i < m; ++i) W[i] = interaction(p_, eta, i);
        std::vector<double> pi = normalise_pi(W, B_, fallback);
        double u = rng.uniform(), acc = 0.0;
        std::size_t xi = m - 1;
        for (std::size_t i = 0; i < m; ++i) {
            acc += pi[i];
            if (u < acc) {
                xi = i;
                break;
            }
        }
        while (pi[xi] == 0.0) --xi;  // guard against rounding in the cumulative sum
        double boltz = std::exp(-beta_ * W[xi]);
        Configuration rest;
        for (std::size_t i = 0; i < m; ++i)
            if (i != xi) rest.push_back(eta[i]);
        int kmax = c_ == 0.0 ? 0 : n_cap - static_cast<int>(m) + 1;
        if (kmax < 0) kmax = 0;
        auto [k, S] = pick_order(0, kmax, rng);
        Configuration ys;
        double w = boltz * S * mayer_draws(eta[xi], k, rng, ys);
        if (w == 0.0) return 0.0;
        rest.insert(rest.end(), ys.begin(), ys.end());
        return w * inner(rest);
    }

    // (K^n delta)(eta) by recursion of single-branch steps.
    double power(int n, const Configuration& eta, Stream& rng, bool* fallback) const {
        const std::size_t m = eta.size();
        if (n == 0) return m == 1 ? 1.0 : 0.0;
        if (m == 0 || m > static_cast<std::size_t>(n) + 1) return 0.0;
        return step(eta, n, rng, [&](const Configuration& cfg) { return power(n - 1, cfg, rng, fallback); },
                    fallback);
    }

private:
    std::pair<int, double> pick_order(int kmin, int kmax, Stream& rng) const {
        std::vector<double> c;
        double t = 1.0, S = 0.0;
        for (int k = 0; k <= kmax; ++k) {
            if (k > 0) t *= c_ / k;
            c.push_back(k >= kmin ? t : 0.0);
            S += c.back();
        }
        double u = rng.uniform() * S, acc = 0.0;
        int k = kmax;
        for (int j = kmin; j <= kmax; ++j) {
            acc += c[j];
            if (u < acc) {
                k = j;
                break;
            }
        }
        return {k, S};
    }

    // prod_i w_i / C for k draws around x; points appended to ys.
    double mayer_draws(const Point& x, int k, Stream& rng, Configuration& ys) const {
        double w = 1.0;
        for (int i = 0; i < k; ++i) {
            Point y;
            w *= sampler_->sample(x, rng, y) / c_;
            ys.push_back(y);
        }
        return w;
    }

    const Potential& p_;
    double beta_, c_, B_;
    std::unique_ptr<MayerSampler> sampler_;
};

std::uint64_t eta_tag(const char* name, const Configuration& eta) {
    std::uint64_t h = stream_tag(name);
    for (const auto& x : eta)
        for (double c : x) {
            std::uint64_t bits;
            std::memcpy(&bits, &c, sizeof bits);
            h = splitmix64(h ^ bits);
        }
    return h;
}

void check_radius(const KSBounds& kb, double z, const KSTruncation& trunc) {
    if (!trunc.override_radius && z > kb.z_max) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "activity %.6g exceeds the KS convergence radius e^{-2 beta B - 1}/C(beta) = %.6g",
                      z, kb.z_max);
        throw RadiusError(buf);
    }
}

double default_xi(const KSTruncation& trunc, const EnsembleParams& ens, double B) {
    return trunc.xi > 0 ? trunc.xi : ens.z * std::exp(2.0 * ens.beta * B + 1.0);
}

}  // namespace

// ---- direct definitions ----

Estimate rho_direct(const Potential& p, const Region& region, const EnsembleParams& ens, const Configuration& eta,
                    const Budget& budget) {
    check_eta_in(region, eta);
    if (eta.empty()) return Estimate{1.0, 0.0, 0.0, Method::enumeration, ""};
    const double zm = std::pow(ens.z, static_cast<double>(eta.size()));
    if (zm == 0.0) return Estimate{0.0, 0.0, 0.0, Method::enumeration, ""};
    const double B = stability_B(p);
    Estimate num = uniform_series(p, region, ens, eta, budget, B, eta_tag("rho_direct", eta));
    Budget zb = budget;
    Estimate zg = uniform_series(p, region, ens, {}, zb, B, stream_tag("rho_direct_z"));
    const double v = zm * num.value / zg.value;
    return propagate(v, {{zm / zg.value, &num}, {-v / zg.value, &zg}});
}

Estimate rho_dilute_direct(const Potential& p, const Region& region, const EnsembleParams& ens,
                           const Configuration& eta, const Budget& budget, DiluteMode mode) {
    check_eta_in(region, eta);
    if (eta.empty()) return Estimate{1.0, 0.0, 0.0, Method::enumeration, ""};
    if (chi_minus(region, eta) == 0) return Estimate{0.0, 0.0, 0.0, Method::enumeration, ""};
    const double zm = std::pow(ens.z, static_cast<double>(eta.size()));
    if (zm == 0.0) return Estimate{0.0, 0.0, 0.0, Method::enumeration, ""};
    Estimate in = dilute_integral(p, region, ens, eta, budget, mode, eta_tag("rho_dilute", eta));
    Estimate zmn = dilute_integral(p, region, ens, {}, budget, mode, stream_tag("rho_dilute_z"));
    const double v = zm * in.value / zmn.value;
    return propagate(v, {{zm / zmn.value, &in}, {-v / zmn.value, &zmn}});
}

RemainderSplit remainder_direct(const Potential& p, const Region& region, const EnsembleParams& ens,
                                const Configuration& eta, const Budget& budget, DiluteMode mode) {
    check_eta_in(region, eta);
    RemainderSplit s;
    s.z_minus = dilute_integral(p, region, ens, {}, budget, mode, stream_tag("split_z_minus"));
    s.z_excess = nondilute_integral(p, region, ens, {}, budget, stream_tag("split_z_excess"));
    s.i_minus = dilute_integral(p, region, ens, eta, budget, mode, eta_tag("split_i_minus", eta));
    s.d_eta = nondilute_integral(p, region, ens, eta, budget, eta_tag("split_d_eta", eta));
    const double zm = std::pow(ens.z, static_cast<double>(eta.size()));
    const double Zm = s.z_minus.value, D = s.z_excess.value, Z = Zm + D;
    const double I = s.i_minus.value, De = s.d_eta.value;
    if (!(Zm > 0.0)) throw DomainError("Z^- estimate is not positive");
    const double rho = zm * (I + De) / Z, rho_m = zm * I / Zm, R = zm * De / Z, ratio = Zm / Z;
    s.rho_full = propagate(rho, {{zm / Z, &s.i_minus}, {zm / Z, &s.d_eta}, {-rho / Z, &s.z_minus},
                                 {-rho / Z, &s.z_excess}});
    s.rho_minus = propagate(rho_m, {{zm / Zm, &s.i_minus}, {-rho_m / Zm, &s.z_minus}});
    s.remainder = propagate(R, {{zm / Z, &s.d_eta}, {-R / Z, &s.z_minus}, {-R / Z, &s.z_excess}});
    s.z_ratio = propagate(ratio, {{D / (Z * Z), &s.z_minus}, {-Zm / (Z * Z), &s.z_excess}});
    return s;
}

// ---- Kirkwood-Salzburg: shared ----

double ks_tail_bound(const KSBounds& kb, double z, std::size_t size, int order) {
    if (z == 0.0 || size == 0) return 0.0;
    const double r = z * kb.q;
    if (!(r < 1.0)) return kInf;
    return std::pow(kb.xi, static_cast<double>(size) - 1.0) * z * std::pow(r, order + 1) / (1.0 - r);
}

std::vector<double> pi_weights(const Potential& p, double B, const Configuration& eta, bool* fallback) {
    std::vector<double> W(eta.size());
    for (std::size_t i = 0; i < eta.size(); ++i) W[i] = interaction(p, eta, i);
    return normalise_pi(W, B, fallback);
}

// ---- continuum ----

KSBounds ks_bounds_continuum(const Potential& p, const EnsembleParams& ens, const KSTruncation& trunc) {
    KSBounds kb;
    kb.B = stability_B(p);
    kb.c = mayer_c_beta(p, ens.beta).value;
    kb.z_max = activity_radius(kb.c, ens.beta, kb.B);
    kb.xi = default_xi(trunc, ens, kb.B);
    kb.q = kb.xi > 0 ? std::exp(2.0 * ens.beta * kb.B + kb.xi * kb.c) / kb.xi : kInf;
    return kb;
}

Estimate ks_apply_continuum(const Potential& p, const EnsembleParams& ens, const KSFunction& f, int n_cap,
                            const Configuration& eta, const KSTruncation& trunc) {
    const double B = stability_B(p), c = mayer_c_beta(p, ens.beta).value;
    ContinuumKS ks(p, ens, c, B, trunc);
    const Budget& b = trunc.budget;
    const std::uint64_t tag = eta_tag("ks_apply", eta);
    std::atomic<bool> fb{false};
    MeanVar mv = run_chunks<MeanVar>(b.samples, b.workers, [&](std::size_t chunk, std::size_t count) {
        Stream rng(b.seed, {tag, chunk});
        MeanVar acc;
        bool local = false;
        for (std::size_t s = 0; s < count; ++s) acc.add(ks.step(eta, n_cap, rng, f, &local));
        if (local) fb = true;
        return acc;
    });
    Estimate e{mv.mean, mv.sem(), 0.0, Method::monte_carlo, ""};
    if (fb) e.warning = "pi weights fell back to uniform";
    return e;
}

Estimate ks_series_continuum(const Potential& p, const EnsembleParams& ens, const Configuration& eta,
                             const KSTruncation& trunc, std::vector<double>* terms) {
    if (trunc.order < 0) throw PreconditionError("series order must be >= 0");
    KSBounds kb = ks_bounds_continuum(p, ens, trunc);
    check_radius(kb, ens.z, trunc);
    ContinuumKS ks(p, ens, kb.c, kb.B, trunc);
    const Budget& b = trunc.budget;
    const std::uint64_t tag = eta_tag("ks_series", eta);
    Estimate e;
    e.method = Method::monte_carlo;
    double var = 0.0;
    bool any_fallback = false;
    if (terms) terms->clear();
    for (int n = 0; n <= trunc.order; ++n) {
        const double zn = std::pow(ens.z, n + 1);
        double mean = 0.0, sem = 0.0;
        if (zn != 0.0 && eta.size() <= static_cast<std::size_t>(n) + 1) {
            if (n == 0 || kb.c == 0.0) {
                // deterministic: delta, or the Boltzmann chain when all Mayer terms vanish
                Stream rng(b.seed, {tag, static_cast<std::uint64_t>(n)});
                bool fb = false;
                mean = ks.power(n, eta, rng, &fb);
                any_fallback |= fb;
            } else {
                std::atomic<bool> fb{false};
                MeanVar mv = run_chunks<MeanVar>(b.samples, b.workers, [&](std::size_t chunk, std::size_t count) {
                    Stream rng(b.seed, {tag, static_cast<std::uint64_t>(n), chunk});
                    MeanVar acc;
                    bool local = false;
                    for (std::size_t s = 0; s < count; ++s) acc.add(ks.power(n, eta, rng, &local));
                    if (local) fb = true;
                    return acc;
                });
                mean = mv.mean;
                sem = mv.sem();
                any_fallback |= fb.load();
            }
        }
        e.value += zn * mean;
        var += zn * sem * zn * sem;
        if (terms) terms->push_back(zn * mean);
    }
    e.stat_err = std::sqrt(var);
    e.trunc_bound = ks_tail_bound(kb, ens.z, eta.size(), trunc.order);
    if (any_fallback) e.warning = "pi weights fell back to uniform";
    return e;
}

// ---- discrete ----

NodeLattice::NodeLattice(const Potential& p, const Region& ambient, int quad_nodes, const Configuration& anchors)
    : p_(p), region_(ambient) {
    n_cubes_ = ambient.size();
    by_cube_.resize(n_cubes_);
    for (std::size_t c = 0; c < n_cubes_; ++c)
        for (const auto& wp : cube_rule(ambient.grid(), ambient.cubes()[c], quad_nodes)) {
            by_cube_[c].push_back(pts_.size());
            pts_.push_back(wp.x);
            w_.push_back(wp.w);
            cube_.push_back(c);
        }
    n_nodes_ = pts_.size();
    std::vector<int> used(n_cubes_, 0);
    for (const auto& x : anchors) {
        long s = ambient.slot_of_point(x);
        if (s < 0) throw PreconditionError("anchors must lie inside the ambient region");
        if (used[s]++) throw PreconditionError("anchors must occupy distinct cubes");
        pts_.push_back(x);
        w_.push_back(0.0);
        cube_.push_back(static_cast<std::size_t>(s));
    }
}

double NodeLattice::mayer(std::size_t x, std::size_t y, double beta) const {
    if (cube_[x] == cube_[y]) return -1.0;
    return std::expm1(-beta * p_.eval_sq(dist2(pts_[x], pts_[y])));
}

double NodeLattice::kernel_mass(double beta) const {
    double best = 0.0;
    for (std::size_t x = 0; x < pts_.size(); ++x) {
        double s = 0.0;
        for (std::size_t y = 0; y < n_nodes_; ++y) s += w_[y] * std::fabs(mayer(x, y, beta));
        best = std::max(best, s);
    }
    return best;
}

namespace {

struct SitesHash {
    std::size_t operator()(const Sites& s) const {
        std::uint64_t h = 0x9e3779b97f4a7c15ULL;
        for (auto v : s) h = splitmix64(h ^ v);
        return static_cast<std::size_t>(h);
    }
};

Sites with(const Sites& base, std::uint32_t y) {
    Sites out(base);
    out.insert(std::upper_bound(out.begin(), out.end(), y), y);
    return out;
}

// Cube-operator machinery on a node lattice with precomputed kernels.
class DiscreteKS {
public:
    DiscreteKS(const NodeLattice& lat, const EnsembleParams& ens, double B, double work_cap)
        : lat_(lat), beta_(ens.beta), B_(B), cap_(work_cap) {
        const std::size_t S = lat.size(), N = lat.n_nodes();
        kern_.assign(S * N, 0.0);
        for (std::size_t x = 0; x < S; ++x)
            for (std::size_t y = 0; y < N; ++y) kern_[x * N + y] = lat.weight(y) * lat.mayer(x, y, beta_);
    }

    // (K f)(s) with f vanishing on sets larger than n_cap.
    double apply(const Sites& s, int n_cap, const SiteFunction& f) {
        const std::size_t m = s.size();
        if (m == 0) return 0.0;
        if (m == 1) return q_sum(s[0], {}, n_cap, f);
        std::vector<double> W(m, 0.0);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                if (i != j) W[i] += lat_.potential().eval_sq(dist2(lat_.point(s[i]), lat_.point(s[j])));
        bool fb = false;
        std::vector<double> pi = normalise_pi(W, B_, &fb);
        fallback_ |= fb;
        double total = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (pi[i] == 0.0) continue;
            Sites rest;
            for (std::size_t j = 0; j < m; ++j)
                if (j != i) rest.push_back(s[j]);
            int kmax = n_cap - static_cast<int>(m) + 1;
            double inner = f(rest) + (kmax >= 1 ? q_sum(s[i], rest, kmax, f) : 0.0);
            total += pi[i] * std::exp(-beta_ * W[i]) * inner;
        }
        return total;
    }

    double power(int n, const Sites& s) {
        const std::size_t m = s.size();
        if (n == 0) return m == 1 ? 1.0 : 0.0;
        if (m == 0 || m > static_cast<std::size_t>(n) + 1) return 0.0;
        if (memo_.size() <= static_cast<std::size_t>(n)) memo_.resize(n + 1);
        auto it = memo_[n].find(s);
        if (it != memo_[n].end()) return it->second;
        double v = apply(s, n, [&](const Sites& t) { return power(n - 1, t); });
        memo_[n].emplace(s, v);
        return v;
    }

    bool fallback() const { return fallback_; }

private:
    // sum over nonempty Q (one node per cube, cubes of `base` excluded, |Q| <= kmax)
    // of prod_{y in Q} w_y mayer(x, y) f(base u Q).
    double q_sum(std::uint32_t x, const Sites& base, int kmax, const SiteFunction& f) {
        std::vector<char> blocked(lat_.n_cubes(), 0);
        for (auto b : base) blocked[lat_.cube(b)] = 1;
        double acc = 0.0;
        Sites cur = base;
        q_rec(x, blocked, 0, kmax, 1.0, cur, f, acc);
        return acc;
    }

    void q_rec(std::uint32_t x, const std::vector<char>& blocked, std::size_t start, int kleft, double prod,
               Sites& cur, const SiteFunction& f, double& acc) {
        const std::size_t N = lat_.n_nodes();
        for (std::size_t c = start; c < lat_.n_cubes(); ++c) {
            if (blocked[c]) continue;
            for (std::size_t y : lat_.nodes_of(c)) {
                double k = kern_[x * N + y];
                if (k == 0.0) continue;
                if (++work_ > cap_) throw SizeError("discrete KS exceeds the work cap");
                Sites next = with(cur, static_cast<std::uint32_t>(y));
                acc += prod * k * f(next);
                if (kleft > 1) q_rec(x, blocked, c + 1, kleft - 1, prod * k, next, f, acc);
            }
        }
    }

    const NodeLattice& lat_;
    double beta_, B_, cap_;
    double work_ = 0.0;
    bool fallback_ = false;
    std::vector<double> kern_;
    std::vector<std::unordered_map<Sites, double, SitesHash>> memo_;
};

Sites anchor_sites(const NodeLattice& lat, std::size_t n) {
    Sites s;
    for (std::size_t i = 0; i < n; ++i) s.push_back(static_cast<std::uint32_t>(lat.anchor(i)));
    return s;
}

}  // namespace

double ks_apply_discrete(const NodeLattice& lat, const EnsembleParams& ens, double B, const SiteFunction& f,
                         int n_cap, const Sites& s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] >= lat.size()) throw PreconditionError("site index out of range");
        if (i > 0 && s[i - 1] >= s[i]) throw PreconditionError("sites must be sorted and distinct");
        for (std::size_t j = 0; j < i; ++j)
            if (lat.cube(s[i]) == lat.cube(s[j])) throw PreconditionError("sites must occupy distinct cubes");
    }
    DiscreteKS ks(lat, ens, B, 5e7);
    return ks.apply(s, n_cap, f);
}

KSBounds ks_bounds_discrete(const NodeLattice& lat, const EnsembleParams& ens, const KSTruncation& trunc) {
    KSBounds kb;
    kb.B = stability_B(lat.potential());
    kb.z_max = activity_radius(mayer_c_beta(lat.potential(), ens.beta).value, ens.beta, kb.B);
    kb.c = lat.kernel_mass(ens.beta);
    kb.xi = default_xi(trunc, ens, kb.B);
    kb.q = kb.xi > 0 ? std::exp(2.0 * ens.beta * kb.B + kb.xi * kb.c) / kb.xi : kInf;
    return kb;
}

Estimate ks_series_discrete(const Potential& p, const Region& ambient, const EnsembleParams& ens,
                            const Configuration& eta, const KSTruncation& trunc, std::vector<double>* terms) {
    if (trunc.order < 0) throw PreconditionError("series order must be >= 0");
    NodeLattice lat(p, ambient, trunc.budget.quad_nodes, eta);
    KSBounds kb = ks_bounds_discrete(lat, ens, trunc);
    check_radius(kb, ens.z, trunc);
    DiscreteKS ks(lat, ens, kb.B, trunc.budget.work_cap);
    Sites s = anchor_sites(lat, eta.size());
    Estimate e;
    e.method = Method::quadrature;
    if (terms) terms->clear();
    for (int n = 0; n <= trunc.order; ++n) {
        double t = ens.z == 0.0 ? 0.0 : std::pow(ens.z, n + 1) * ks.power(n, s);
        e.value += t;
        if (terms) terms->push_back(t);
    }
    e.trunc_bound = ks_tail_bound(kb, ens.z, eta.size(), trunc.order);
    if (ks.fallback()) e.warning = "pi weights fell back to uniform";
    return e;
}

// ---- a -> 0 study ----

std::vector<ConvergenceRow> convergence_report(const Potential& p, const EnsembleParams& ens,
                                               const Configuration& eta, const std::vector<double>& a_sequence,
                                               double length, const Budget& budget) {
    std::vector<ConvergenceRow> rows;
    const int d = p.dim();
    for (double a : a_sequence) {
        ConvergenceRow row;
        row.a = a;
        Region region = box_of_length(a, d, length);
        check_eta_in(region, eta);
        if (chi_minus(region, eta) == 0) {
            row.skipped = true;
            row.note = "two points of eta share a cube at this edge";
            rows.push_back(row);
            continue;
        }
        row.split = remainder_direct(p, region, ens, eta, budget);
        const auto& s = row.split;
        // rho - rho^- = R - rho^- D / Z, written without cancellation
        const double Z = s.z_minus.value + s.z_excess.value;
        row.diff = s.remainder.value - s.rho_minus.value * (s.z_excess.value / Z);
        row.diff_err = hypot2(s.remainder.stat_err, s.rho_minus.stat_err * s.z_excess.value / Z);
        row.diff_err = hypot2(row.diff_err, s.rho_minus.value * s.z_excess.stat_err / Z);
        StabilityConstants c = stability_constants(p, region.grid());
        Epsilon1 e1 = epsilon1(c, ens, d);
        row.ratio_envelope = std::expm1(static_cast<double>(region.size()) * std::log1p(e1.closed));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace qla
