#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qla/estimate.hpp"
#include "qla/lattice.hpp"
#include "qla/potential.hpp"
#include "qla/sampling.hpp"

namespace qla {

// ---- direct definitions on a finite region ----

// rho_Lambda(eta) = z^{|eta|}/Z sum_n z^n/n! int_{Lambda^n} e^{-beta U(eta u gamma)}.
Estimate rho_direct(const Potential& p, const Region& region, const EnsembleParams& ens, const Configuration& eta,
                    const Budget& budget);

// Dilute correlation function: z^{|eta|} I^-(eta) / Z^-, with I^-(eta) the
// integral over gamma such that eta u gamma is dilute. Exactly 0 when eta is
// not dilute.
Estimate rho_dilute_direct(const Potential& p, const Region& region, const EnsembleParams& ens,
                           const Configuration& eta, const Budget& budget,
                           DiluteMode mode = DiluteMode::automatic);

// rho_Lambda split as (Z^-/Z) rho^- + R from four independent integrals:
// Z^-, D = Z - Z^-, I^-(eta) and D(eta).
struct RemainderSplit {
    Estimate rho_full;
    Estimate rho_minus;
    Estimate remainder;  // z^{|eta|} D(eta) / Z
    Estimate z_ratio;    // Z^- / Z
    Estimate z_minus, z_excess, i_minus, d_eta;
};

RemainderSplit remainder_direct(const Potential& p, const Region& region, const EnsembleParams& ens,
                                const Configuration& eta, const Budget& budget,
                                DiluteMode mode = DiluteMode::automatic);

// ---- Kirkwood-Salzburg series ----

struct KSTruncation {
    int order = 4;              // N: terms z^{n+1} (K^n delta), n = 0..N
    double cutoff_radius = -1;  // start of the heavy-tailed radial sampling cell; < 0 picks one
    Budget budget;              // samples per term (continuum), quad_nodes (discrete)
    double xi = -1;             // norm scale; < 0 gives z e^{2 beta B + 1}
    bool override_radius = false;
};

using KSFunction = std::function<double(const Configuration&)>;

// Radius and tail bookkeeping shared by both variants.
struct KSBounds {
    double c = 0.0;       // Mayer-kernel mass used in the operator norm
    double B = 0.0;       // stability constant used for the pi weights
    double z_max = 0.0;   // e^{-2 beta B - 1} / C(beta)
    double xi = 0.0;
    double q = 0.0;       // operator norm bound xi^-1 e^{2 beta B} e^{xi c}
};

// Bound on |sum_{n>N} z^{n+1} (K^n delta)(eta)| for |eta| = size; +inf when
// z q >= 1.
double ks_tail_bound(const KSBounds& kb, double z, std::size_t size, int order);

// pi~ weights over the points of eta: 1 for points with W(x; eta\x) >= -2B
// (1e-12 relative slack), normalised. Falls back to uniform weights and sets
// `fallback` when no point qualifies.
std::vector<double> pi_weights(const Potential& p, double B, const Configuration& eta, bool* fallback = nullptr);

// One application (K f)(eta), f vanishing on configurations larger than
// n_cap. Mayer integrals over R^d are sampled with a radial density close to
// |e^{-beta phi} - 1|.
Estimate ks_apply_continuum(const Potential& p, const EnsembleParams& ens, const KSFunction& f, int n_cap,
                            const Configuration& eta, const KSTruncation& trunc);

// sum_{n<=N} z^{n+1} (K^n delta)(eta), infinite volume. `terms` receives the
// per-order contributions when non-null. Throws RadiusError for z > z_max
// unless overridden.
Estimate ks_series_continuum(const Potential& p, const EnsembleParams& ens, const Configuration& eta,
                             const KSTruncation& trunc, std::vector<double>* terms = nullptr);

KSBounds ks_bounds_continuum(const Potential& p, const EnsembleParams& ens, const KSTruncation& trunc);

// Cube variant on a finite ambient region. Cube integrals are tensor
// Gauss-Legendre sums, so the hierarchy is that of a lattice gas on the nodes
// (at most one occupied node per cube) and the series converges to the dilute
// correlation function computed with the same rule. Points of eta act as
// anchors: fixed sites inside their cubes.
class NodeLattice {
public:
    NodeLattice(const Potential& p, const Region& ambient, int quad_nodes, const Configuration& anchors);

    std::size_t size() const { return pts_.size(); }    // nodes then anchors
    std::size_t n_nodes() const { return n_nodes_; }
    std::size_t anchor(std::size_t i) const { return n_nodes_ + i; }
    const Point& point(std::size_t site) const { return pts_[site]; }
    double weight(std::size_t site) const { return w_[site]; }
    std::size_t cube(std::size_t site) const { return cube_[site]; }
    std::size_t n_cubes() const { return n_cubes_; }
    const std::vector<std::size_t>& nodes_of(std::size_t cube) const { return by_cube_[cube]; }
    const Region& region() const { return region_; }
    const Potential& potential() const { return p_; }

    // Mayer factor of the cube potential: -1 inside one cube.
    double mayer(std::size_t x, std::size_t y, double beta) const;
    // max over sites x of sum_y w_y |mayer(x, y)| over nodes y.
    double kernel_mass(double beta) const;

private:
    Potential p_;
    Region region_;
    std::size_t n_nodes_ = 0, n_cubes_ = 0;
    std::vector<Point> pts_;
    std::vector<double> w_;
    std::vector<std::size_t> cube_;
    std::vector<std::vector<std::size_t>> by_cube_;
};

using Sites = std::vector<std::uint32_t>;  // sorted, one site per cube
using SiteFunction = std::function<double(const Sites&)>;

// One application (K f)(s) of the cube operator. Exact given f.
double ks_apply_discrete(const NodeLattice& lat, const EnsembleParams& ens, double B, const SiteFunction& f,
                         int n_cap, const Sites& s);

KSBounds ks_bounds_discrete(const NodeLattice& lat, const EnsembleParams& ens, const KSTruncation& trunc);

// sum_{n<=N} z^{n+1} ((K^-)^n delta)(s) at the anchors eta (memoised).
// trunc_bound is the series tail; the quadrature rule is trunc.budget.quad_nodes.
Estimate ks_series_discrete(const Potential& p, const Region& ambient, const EnsembleParams& ens,
                            const Configuration& eta, const KSTruncation& trunc,
                            std::vector<double>* terms = nullptr);

// ---- a -> 0 study ----

struct ConvergenceRow {
    double a = 0.0;
    bool skipped = false;  // two points of eta share a cube
    std::string note;
    RemainderSplit split;
    double diff = 0.0;           // rho_full - rho_minus
    double diff_err = 0.0;
    double ratio_envelope = 0.0; // (1 + eps1)^{N_Lambda} - 1
};

// Regions are boxes of side `length` at each edge in `a_sequence`.
std::vector<ConvergenceRow> convergence_report(const Potential& p, const EnsembleParams& ens,
                                               const Configuration& eta, const std::vector<double>& a_sequence,
                                               double length, const Budget& budget);

}  // namespace qla
