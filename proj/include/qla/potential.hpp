#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>

#include "qla/estimate.hpp"

namespace qla {

enum class Family { pure_repulsive, power_core_with_tail, lennard_jones, zero, hard_core };

const char* family_name(Family f);
Family family_from_name(const std::string& name);  // throws ConfigError

// Pass to Potential::make to admit the zero and hard-core test families.
struct TestOnly {};

// Radial pair potential. The built-in families are sums of at most two
// inverse powers, c_0 r^-p_0 + c_1 r^-p_1 with p_0 > p_1.
class Potential {
public:
    // Parameters: pure-repulsive {c_r, s}; power-core-with-tail {c_r, s, c_a, eps0};
    // lennard-jones {epsilon, sigma}; hard-core {sigma}; zero {}.
    static Potential make(Family f, int dim, const std::map<std::string, double>& params);
    static Potential make(Family f, int dim, const std::map<std::string, double>& params, TestOnly);

    static Potential pure_repulsive(int dim, double c_r, double s);
    static Potential power_core_with_tail(int dim, double c_r, double s, double c_a, double eps0);
    static Potential lennard_jones(int dim, double epsilon, double sigma);
    static Potential zero(int dim, TestOnly);
    static Potential hard_core(int dim, double sigma, TestOnly);

    Family family() const { return family_; }
    int dim() const { return dim_; }
    const std::map<std::string, double>& params() const { return params_; }
    bool is_test_only() const { return family_ == Family::zero || family_ == Family::hard_core; }
    // True when phi >= 0 everywhere.
    bool nonnegative() const { return n_terms_ < 2 || family_ == Family::hard_core; }

    // phi(r); +infinity only for the hard-core stub.
    double eval(double r) const;
    // Same as eval but without the domain check; r2 is the squared distance.
    double eval_sq(double r2) const;
    std::pair<double, double> split(double r) const;  // (phi+, phi-)

    // Location of the minimum of phi (the maximum of phi-) when there is a well.
    std::optional<double> well() const;
    // Radius where phi changes sign, when it does.
    std::optional<double> zero_crossing() const;
    // Sup of phi- over separations in [lo, hi] (exact for the built-in families).
    double sup_phi_minus(double lo, double hi) const;
    // Inf of phi+ over separations in (0, hi].
    double inf_phi_plus(double hi) const;
    // |phi(r)| <= envelope.first * r^-envelope.second for r >= r_min.
    std::pair<double, double> envelope(double r_min) const;

private:
    Family family_ = Family::zero;
    int dim_ = 1;
    std::map<std::string, double> params_;
    int n_terms_ = 0;
    double coef_[2] = {0.0, 0.0};
    double power_[2] = {0.0, 0.0};
    int ipower_[2] = {-1, -1};  // even integer powers use a fast path
    double sigma_ = 0.0;        // hard-core radius
};

struct AssumptionAParams {
    double r0 = 0.0;
    double R = 0.0;
    double phi0 = 0.0;
    double phi1 = 0.0;
    double s = 0.0;
    double eps0 = 0.0;
};

// Core and tail bounds phi >= phi0 r^-s (r <= r0), phi >= -phi1 r^-(d+eps0)
// (r >= R), verified on 10^4-point log grids per regime.
AssumptionAParams certify_assumption_a(const Potential& p);

// Surface area of the unit sphere in R^d.
double sphere_area(int d);

// C(beta) = integral of |e^{-beta phi} - 1| over R^d.
Estimate mayer_c_beta(const Potential& p, double beta, double tol = 1e-9);

// Integral of phi- over R^d.
Estimate phi_minus_integral(const Potential& p);

// e^{-2 beta B - 1} / C; +infinity when C == 0.
double activity_radius(double c_beta, double beta, double B);
double activity_radius(const Potential& p, double beta, double B);

}  // namespace qla
