#include "qla/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "qla/errors.hpp"
#include "qla/quadrature.hpp"

namespace qla {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double need(const std::map<std::string, double>& m, const char* key) {
    auto it = m.find(key);
    if (it == m.end()) throw ConfigError(std::string("potential parameter missing: ") + key);
    return it->second;
}

void check_dim(int d) {
    if (d < 1 || d > 3) throw PreconditionError("dimension must be 1, 2 or 3");
}

double ipow(double x, int n) {
    double r = 1.0;
    while (n) {
        if (n & 1) r *= x;
        x *= x;
        n >>= 1;
    }
    return r;
}

int even_int(double p) {
    double h = p / 2.0;
    if (h == std::floor(h) && h >= 0 && h <= 32) return static_cast<int>(h);
    return -1;
}

}  // namespace

const char* family_name(Family f) {
    switch (f) {
        case Family::pure_repulsive: return "pure-repulsive";
        case Family::power_core_with_tail: return "power-core-with-tail";
        case Family::lennard_jones: return "lennard-jones";
        case Family::zero: return "zero";
        case Family::hard_core: return "hard-core";
    }
    return "?";
}

Family family_from_name(const std::string& name) {
    for (Family f : {Family::pure_repulsive, Family::power_core_with_tail, Family::lennard_jones,
                     Family::zero, Family::hard_core})
        if (name == family_name(f)) return f;
    throw ConfigError("unknown potential family '" + name + "'");
}

Potential Potential::make(Family f, int dim, const std::map<std::string, double>& params) {
    switch (f) {
        case Family::pure_repulsive:
            return pure_repulsive(dim, need(params, "c_r"), need(params, "s"));
        case Family::power_core_with_tail:
            return power_core_with_tail(dim, need(params, "c_r"), need(params, "s"), need(params, "c_a"),
                                        need(params, "eps0"));
        case Family::lennard_jones:
            return lennard_jones(dim, need(params, "epsilon"), need(params, "sigma"));
        case Family::zero:
        case Family::hard_core:
            throw PreconditionError(std::string(family_name(f)) + " potential is test-only");
    }
    throw PreconditionError("bad family");
}

Potential Potential::make(Family f, int dim, const std::map<std::string, double>& params, TestOnly t) {
    if (f == Family::zero) return zero(dim, t);
    if (f == Family::hard_core) return hard_core(dim, need(params, "sigma"), t);
    return make(f, dim, params);
}

Potential Potential::pure_repulsive(int dim, double c_r, double s) {
    check_dim(dim);
    if (!(c_r > 0) || !(s > 0)) throw PreconditionError("pure-repulsive needs c_r > 0 and s > 0");
    Potential p;
    p.family_ = Family::pure_repulsive;
    p.dim_ = dim;
    p.params_ = {{"c_r", c_r}, {"s", s}};
    p.n_terms_ = 1;
    p.coef_[0] = c_r;
    p.power_[0] = s;
    p.ipower_[0] = even_int(s);
    return p;
}

Potential Potential::power_core_with_tail(int dim, double c_r, double s, double c_a, double eps0) {
    check_dim(dim);
    if (!(c_r > 0) || !(c_a > 0) || !(eps0 > 0))
        throw PreconditionError("power-core-with-tail needs c_r, c_a, eps0 > 0");
    double q = dim + eps0;
    if (!(s > q)) throw PreconditionError("power-core-with-tail needs s > d + eps0");
    Potential p;
    p.family_ = Family::power_core_with_tail;
    p.dim_ = dim;
    p.params_ = {{"c_r", c_r}, {"s", s}, {"c_a", c_a}, {"eps0", eps0}};
    p.n_terms_ = 2;
    p.coef_[0] = c_r;
    p.power_[0] = s;
    p.coef_[1] = -c_a;
    p.power_[1] = q;
    p.ipower_[0] = even_int(s);
    p.ipower_[1] = even_int(q);
    return p;
}

Potential Potential::lennard_jones(int dim, double epsilon, double sigma) {
    check_dim(dim);
    if (!(epsilon > 0) || !(sigma > 0)) throw PreconditionError("lennard-jones needs epsilon, sigma > 0");
    Potential p;
    p.family_ = Family::lennard_jones;
    p.dim_ = dim;
    p.params_ = {{"epsilon", epsilon}, {"sigma", sigma}};
    p.n_terms_ = 2;
    p.coef_[0] = 4.0 * epsilon * std::pow(sigma, 12);
    p.power_[0] = 12;
    p.coef_[1] = -4.0 * epsilon * std::pow(sigma, 6);
    p.power_[1] = 6;
    p.ipower_[0] = 6;
    p.ipower_[1] = 3;
    return p;
}

Potential Potential::zero(int dim, TestOnly) {
    check_dim(dim);
    Potential p;
    p.family_ = Family::zero;
    p.dim_ = dim;
    return p;
}

Potential Potential::hard_core(int dim, double sigma, TestOnly) {
    check_dim(dim);
    if (!(sigma > 0)) throw PreconditionError("hard-core needs sigma > 0");
    Potential p;
    p.family_ = Family::hard_core;
    p.dim_ = dim;
    p.params_ = {{"sigma", sigma}};
    p.sigma_ = sigma;
    return p;
}

double Potential::eval_sq(double r2) const {
    if (family_ == Family::hard_core) return r2 < sigma_ * sigma_ ? kInf : 0.0;
    double v = 0.0;
    double inv = 1.0 / r2;
    for (int i = 0; i < n_terms_; ++i)
        v += coef_[i] * (ipower_[i] >= 0 ? ipow(inv, ipower_[i]) : std::pow(inv, 0.5 * power_[i]));
    return v;
}

double Potential::eval(double r) const {
    if (!(r > 0)) throw DomainError("potential evaluated at r <= 0");
    return eval_sq(r * r);
}

std::pair<double, double> Potential::split(double r) const {
    double v = eval(r);
    return v >= 0 ? std::pair{v, 0.0} : std::pair{0.0, -v};
}

std::optional<double> Potential::well() const {
    if (n_terms_ < 2) return std::nullopt;
    double c0 = coef_[0], c1 = -coef_[1], p0 = power_[0], p1 = power_[1];
    return std::pow(c0 * p0 / (c1 * p1), 1.0 / (p0 - p1));
}

std::optional<double> Potential::zero_crossing() const {
    if (n_terms_ < 2) return std::nullopt;
    return std::pow(coef_[0] / -coef_[1], 1.0 / (power_[0] - power_[1]));
}

double Potential::sup_phi_minus(double lo, double hi) const {
    auto w = well();
    if (!w) return 0.0;
    double r;
    if (hi < *w)
        r = hi;
    else if (lo > *w)
        r = lo;
    else
        r = *w;
    if (!(r > 0)) return 0.0;
    return std::max(0.0, -eval(r));
}

double Potential::inf_phi_plus(double hi) const {
    if (family_ == Family::zero) return 0.0;
    if (family_ == Family::hard_core) return hi < sigma_ ? kInf : 0.0;
    auto w = well();
    double r = w ? std::min(hi, *w) : hi;
    return std::max(0.0, eval(r));
}

std::pair<double, double> Potential::envelope(double r_min) const {
    if (n_terms_ == 0) return {0.0, dim_ + 1.0};
    double pmin = power_[n_terms_ - 1];
    double m = 0.0;
    for (int i = 0; i < n_terms_; ++i) m += std::fabs(coef_[i]) * std::pow(r_min, pmin - power_[i]);
    return {m, pmin};
}

AssumptionAParams certify_assumption_a(const Potential& p) {
    const int d = p.dim();
    const auto& pr = p.params();
    AssumptionAParams a;
    double q = 0.0;  // d + eps0
    bool exact_core = false;
    switch (p.family()) {
        case Family::zero:
        case Family::hard_core:
            throw CertificationError(std::string(family_name(p.family())) +
                                     " potential has no repulsive power-law core");
        case Family::pure_repulsive:
            a.s = pr.at("s");
            a.r0 = 1.0;
            a.R = 2.0;
            a.eps0 = 1.0;
            a.phi0 = pr.at("c_r");
            a.phi1 = 1.0;
            exact_core = true;
            break;
        case Family::power_core_with_tail: {
            a.s = pr.at("s");
            a.eps0 = pr.at("eps0");
            double r_zero = std::pow(pr.at("c_r") / pr.at("c_a"), 1.0 / (a.s - d - a.eps0));
            a.r0 = 0.9 * r_zero;
            a.R = 2.0 * r_zero;
            break;
        }
        case Family::lennard_jones:
            if (d >= 6) throw CertificationError("lennard-jones tail is not integrable for d >= 6");
            a.s = 12;
            a.eps0 = 6.0 - d;
            a.r0 = 0.9 * pr.at("sigma");
            a.R = 1.5 * pr.at("sigma");
            break;
    }
    if (a.s < d) throw CertificationError("core exponent s is below the dimension");
    q = d + a.eps0;

    const int n = 10000;
    double core_min = kInf;
    double tail_sup = 0.0;
    std::vector<double> core_r(n), tail_r(n);
    for (int i = 0; i < n; ++i) {
        double t = static_cast<double>(i) / (n - 1);
        core_r[i] = a.r0 * std::pow(1e-4, 1.0 - t);
        tail_r[i] = a.R * std::pow(1e4, t);
        core_min = std::min(core_min, std::pow(core_r[i], a.s) * p.eval(core_r[i]));
        tail_sup = std::max(tail_sup, std::pow(tail_r[i], q) * p.split(tail_r[i]).second);
    }
    if (!exact_core) {
        a.phi0 = 0.95 * core_min;
        // r^q phi-(r) increases to the attractive coefficient
        double limit = p.family() == Family::lennard_jones ? 4.0 * pr.at("epsilon") * std::pow(pr.at("sigma"), 6)
                                                           : pr.at("c_a");
        a.phi1 = 1.05 * std::max(tail_sup, limit);
    }
    if (!(a.phi0 > 0)) throw CertificationError("core bound phi0 is not positive");
    for (int i = 0; i < n; ++i) {
        if (p.eval(core_r[i]) < a.phi0 * std::pow(core_r[i], -a.s) * (1.0 - 1e-12))
            throw CertificationError("core bound fails on the sampling grid");
        if (p.eval(tail_r[i]) < -a.phi1 * std::pow(tail_r[i], -q) * (1.0 + 1e-12))
            throw CertificationError("tail bound fails on the sampling grid");
    }
    return a;
}

double sphere_area(int d) { return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d); }

Estimate mayer_c_beta(const Potential& p, double beta, double tol) {
    if (!(beta > 0)) throw PreconditionError("mayer_c_beta needs beta > 0");
    Estimate e;
    e.method = Method::quadrature;
    const int d = p.dim();
    const double S = sphere_area(d);
    auto abs_integrand = [&](double r) {
        double v = p.eval(r);
        return std::fabs(std::expm1(-beta * v)) * std::pow(r, d - 1);
    };

    if (p.family() == Family::zero) return e;
    if (p.family() == Family::hard_core) {
        double sig = p.params().at("sigma");
        e.value = S * std::pow(sig, d) / d;
        return e;
    }

    AssumptionAParams a;
    try {
        a = certify_assumption_a(p);
    } catch (const CertificationError& ex) {
        throw PreconditionError(std::string("mayer_c_beta needs a certified potential: ") + ex.what());
    }
    double p_tail = p.envelope(1.0).second;
    if (!(p_tail > d)) throw PreconditionError("Mayer function is not integrable (tail decays like r^-d or slower)");

    // Core: 1 - e^{-beta phi0 r^-s} <= integrand/r^{d-1} <= 1 on [0, r_lo].
    double r_lo = a.r0;
    auto core_gap = [&](double r) { return S * std::pow(r, d) / d * std::exp(-beta * a.phi0 * std::pow(r, -a.s)); };
    while (core_gap(r_lo) > 0.1 * tol && r_lo > 1e-300) r_lo *= 0.5;
    double core_hi = S * std::pow(r_lo, d) / d;
    double core_lo = core_hi - core_gap(r_lo);
    double value = 0.5 * (core_hi + core_lo);
    double bound = 0.5 * (core_hi - core_lo);

    // Tail: |e^x - 1| <= |x| e^{|x|} with |phi| <= M r^-p.
    double r_hi = std::max(a.R, 1.0) * 4.0;
    auto tail_bound = [&](double r) {
        auto [m, pw] = p.envelope(r);
        double x0 = beta * m * std::pow(r, -pw);
        return S * beta * m * std::exp(x0) * std::pow(r, d - pw) / (pw - d);
    };
    while (tail_bound(r_hi) > 0.1 * tol && r_hi < 1e12) r_hi *= 2.0;
    double tb = tail_bound(r_hi);
    value += 0.5 * tb;
    bound += 0.5 * tb;

    std::vector<double> cuts{r_lo, a.r0, a.R, r_hi};
    if (auto w = p.well()) cuts.push_back(*w);
    if (auto z = p.zero_crossing()) cuts.push_back(*z);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double lo = std::max(cuts[i], r_lo), hi = std::min(cuts[i + 1], r_hi);
        if (hi <= lo) continue;
        Integral seg = integrate_log_panels(abs_integrand, lo, hi);
        value += S * seg.value;
        bound += S * seg.error;
    }
    e.value = value;
    e.trunc_bound = bound;
    return e;
}

Estimate phi_minus_integral(const Potential& p) {
    Estimate e;
    e.method = Method::quadrature;
    auto w = p.well();
    if (!w) return e;
    const int d = p.dim();
    const double S = sphere_area(d);
    auto f = [&](double r) { return p.split(r).second * std::pow(r, d - 1); };
    // phi- vanishes below the zero crossing, which lies below the well
    double r_zero = *p.zero_crossing();
    double r_hi = 64.0 * *w;
    auto tail_of = [&](double r) {
        auto [m, pw] = p.envelope(r);
        return S * m * std::pow(r, d - pw) / (pw - d);
    };
    while (tail_of(r_hi) > 1e-11 && r_hi < 1e12 * *w) r_hi *= 4.0;
    double tail = tail_of(r_hi);
    Integral a = integrate_log_panels(f, r_zero, *w);
    Integral b = integrate_log_panels(f, *w, r_hi);
    // the envelope tail uses |phi| <= M r^-p; the true tail is within [0, tail]
    e.value = S * (a.value + b.value) + 0.5 * tail;
    e.trunc_bound = S * (a.error + b.error) + 0.5 * tail;
    return e;
}

double activity_radius(double c_beta, double beta, double B) {
    if (c_beta == 0.0) return kInf;
    return std::exp(-2.0 * beta * B - 1.0) / c_beta;
}

double activity_radius(const Potential& p, double beta, double B) {
    return activity_radius(mayer_c_beta(p, beta).value, beta, B);
}

}  // namespace qla
