#include "qla/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qla/correlation.hpp"
#include "qla/energy.hpp"
#include "qla/errors.hpp"
#include "qla/partition.hpp"
#include "qla/random.hpp"

namespace qla {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

using json = nlohmann::json;

const std::set<std::string> kKeys = {
    "family", "params", "test_only", "dimension", "z", "beta", "box", "edge_a", "eta",
    "samples", "workers", "seed", "quad_nodes", "n_max", "work_cap", "dilute_mode",
    "ks_order", "ks_samples", "xi", "cutoff_radius", "continuum",
    "audit_samples", "audit_intensity", "override_radius", "out"};

[[noreturn]] void bad(const std::string& key, const std::string& what) {
    throw ConfigError("config key '" + key + "': " + what);
}

double num(const json& j, const std::string& key) {
    if (!j.is_number()) bad(key, "expected a number");
    return j.get<double>();
}

template <class T>
T integer(const json& j, const std::string& key, long long lo) {
    if (!j.is_number_integer()) bad(key, "expected an integer");
    long long v = j.get<long long>();
    if (v < lo) bad(key, "must be >= " + std::to_string(lo));
    return static_cast<T>(v);
}

bool boolean(const json& j, const std::string& key) {
    if (!j.is_boolean()) bad(key, "expected true or false");
    return j.get<bool>();
}

std::string join_row(const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) s += ", ";
        s += cells[i];
    }
    return s + "\n";
}

std::vector<Region> sweep_regions(const ExperimentConfig& cfg) {
    std::vector<Region> out;
    for (double a : cfg.edge_a) out.push_back(box_of_length(a, cfg.dimension, cfg.box));
    return out;
}

void require_eta(const ExperimentConfig& cfg) {
    if (cfg.eta.empty()) throw ConfigError("config key 'eta': missing (this command needs at least one point)");
}

void require_box(const ExperimentConfig& cfg) {
    if (!(cfg.box > 0)) throw ConfigError("config key 'box': missing or not positive");
}

KSTruncation truncation(const ExperimentConfig& cfg) {
    KSTruncation t;
    t.order = cfg.ks_order;
    t.cutoff_radius = cfg.cutoff_radius;
    t.budget = cfg.budget;
    t.budget.samples = cfg.ks_samples;
    t.xi = cfg.xi;
    t.override_radius = cfg.override_radius;
    return t;
}

struct Check {
    std::string name;
    bool pass = true;
    std::string detail;
};

std::string check_lines(const std::vector<Check>& checks) {
    std::string s;
    for (const auto& c : checks) s += std::string(c.pass ? "PASS " : "FAIL ") + c.name + ": " + c.detail + "\n";
    return s;
}

bool all_pass(const std::vector<Check>& checks) {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

std::string header_lines(const std::string& command, const ExperimentConfig& cfg) {
    std::string s = "command: " + command + "\n";
    s += "potential: " + std::string(family_name(cfg.family));
    for (const auto& [k, v] : cfg.params) s += " " + k + "=" + fmt(v);
    s += "\ndimension: " + std::to_string(cfg.dimension) + "\n";
    s += "z: " + fmt(cfg.ens.z) + "\nbeta: " + fmt(cfg.ens.beta) + "\n";
    s += "seed: " + std::to_string(cfg.budget.seed) + "\n";
    return s;
}

// ---- commands ----

CommandResult cmd_constants(const ExperimentConfig& cfg) {
    CommandResult r;
    const Potential p = cfg.potential();
    const double c_beta = mayer_c_beta(p, cfg.ens.beta).value;
    double a_m = INFINITY, B_global = 0.0;
    if (!p.is_test_only()) {
        GlobalBounds gb = global_bounds(p);
        a_m = gb.a_m;
        B_global = gb.B_global;
    }
    const double z_max = activity_radius(c_beta, cfg.ens.beta, B_global);
    r.csv = "a, b, v0, A, B_local, C_d, a_m, B_global, C_beta, z_max\n";
    std::string rep;
    for (double a : cfg.edge_a) {
        StabilityConstants c = stability_constants(p, CubeGrid(a, cfg.dimension));
        r.csv += join_row({fmt(a), fmt(c.b), fmt(c.v0), fmt(c.A), fmt(c.B_local), fmt(c.C_d), fmt(a_m),
                           fmt(B_global), fmt(c_beta), fmt(z_max)});
        rep += "a=" + fmt(a) + ": b=" + fmt(c.b) + " v0=" + fmt(c.v0) + " A=" + fmt(c.A) + "\n";
    }
    r.report = "a_m: " + fmt(a_m) + "\nB_global: " + fmt(B_global) + "\nC(beta): " + fmt(c_beta) +
               "\nz_max: " + fmt(z_max) + "\n" + rep;
    return r;
}

CommandResult cmd_pressure_scan(const ExperimentConfig& cfg) {
    require_box(cfg);
    CommandResult r;
    auto rows = pressures(cfg.potential(), sweep_regions(cfg), cfg.ens, cfg.budget, cfg.dilute_mode);
    r.csv = "a, n_cubes, volume, p_full, p_full_err, p_minus, p_minus_err, p_plus, p_plus_err, eps1, bound\n";
    std::vector<Check> checks;
    for (const auto& row : rows) {
        r.csv += join_row({fmt(row.a), std::to_string(row.n_cubes), fmt(row.volume), fmt(row.p_full),
                           fmt(row.p_full_err), fmt(row.p_minus), fmt(row.p_minus_err), fmt(row.p_plus),
                           fmt(row.p_plus_err), fmt(row.eps1), fmt(row.bound)});
        checks.push_back({"bound a=" + fmt(row.a), row.bound_ok,
                          "p_plus=" + fmt(row.p_plus) + " <= bound=" + fmt(row.bound) + " + 3*" + fmt(row.p_plus_err)});
    }
    if (rows.size() >= 2) {
        bool dec = true;
        for (std::size_t i = 1; i < rows.size(); ++i) dec &= rows[i].p_plus < rows[i - 1].p_plus;
        checks.push_back({"p_full - p_minus strictly decreasing", dec, std::to_string(rows.size()) + " sweep points"});
    }
    r.report = check_lines(checks);
    r.exit_code = all_pass(checks) ? 0 : 1;
    return r;
}

void check_radius_cfg(const Potential& p, const ExperimentConfig& cfg) {
    if (cfg.override_radius) return;
    const double z_max = activity_radius(p, cfg.ens.beta, stability_B(p));
    if (cfg.ens.z > z_max)
        throw RadiusError("activity z=" + fmt(cfg.ens.z) + " exceeds the KS convergence radius " + fmt(z_max) +
                          "; pass --override-radius to run anyway");
}

// 1 - Z^-/Z as D/Z, which stays resolved after the ratio rounds to 1
double excess_fraction(const ConvergenceRow& row) {
    return row.split.z_excess.value / (row.split.z_minus.value + row.split.z_excess.value);
}

CommandResult cmd_corr_scan(const ExperimentConfig& cfg) {
    require_box(cfg);
    require_eta(cfg);
    const Potential p = cfg.potential();
    check_radius_cfg(p, cfg);
    CommandResult r;
    auto rows = convergence_report(p, cfg.ens, cfg.eta, cfg.edge_a, cfg.box, cfg.budget);
    r.csv = "a, rho_full, rho_full_err, rho_minus, rho_minus_err, diff, remainder_R, z_ratio\n";
    std::vector<Check> checks;
    std::vector<const ConvergenceRow*> used;
    for (const auto& row : rows) {
        if (row.skipped) {
            r.report += "note a=" + fmt(row.a) + ": skipped, " + row.note + "\n";
            continue;
        }
        const auto& s = row.split;
        r.csv += join_row({fmt(row.a), fmt(s.rho_full.value), fmt(s.rho_full.stat_err), fmt(s.rho_minus.value),
                           fmt(s.rho_minus.stat_err), fmt(row.diff), fmt(s.remainder.value), fmt(s.z_ratio.value)});
        const double gap = excess_fraction(row);
        checks.push_back({"ratio envelope a=" + fmt(row.a), gap <= row.ratio_envelope + 3.0 * s.z_ratio.stat_err,
                          "1 - Z^-/Z=" + fmt(gap) + " <= (1+eps1)^N - 1=" + fmt(row.ratio_envelope)});
        used.push_back(&row);
    }
    if (used.size() >= 2) {
        bool inc = true, dec = true;
        for (std::size_t i = 1; i < used.size(); ++i) {
            inc &= excess_fraction(*used[i]) < excess_fraction(*used[i - 1]);
            dec &= std::fabs(used[i]->split.remainder.value) < std::fabs(used[i - 1]->split.remainder.value);
        }
        checks.push_back({"Z^-/Z strictly increasing", inc, std::to_string(used.size()) + " sweep points"});
        checks.push_back({"|R| strictly decreasing", dec, std::to_string(used.size()) + " sweep points"});
    }
    r.report += check_lines(checks);
    r.exit_code = all_pass(checks) ? 0 : 1;
    return r;
}

CommandResult cmd_ks(const ExperimentConfig& cfg) {
    require_box(cfg);
    require_eta(cfg);
    const Potential p = cfg.potential();
    KSTruncation t = truncation(cfg);
    CommandResult r;
    Estimate cont{};
    bool have_cont = false;
    if (cfg.continuum) {
        cont = ks_series_continuum(p, cfg.ens, cfg.eta, t);
        have_cont = true;
        r.report += "continuum series: " + fmt(cont.value) + " +- " + fmt(cont.stat_err) + " (tail " +
                    fmt(cont.trunc_bound) + ")\n";
    }
    r.csv = "a, order, ks_discrete, ks_discrete_tail, rho_dilute, rho_dilute_err, rho_dilute_quad, abs_diff, "
            "ks_continuum, ks_continuum_err, ks_continuum_tail\n";
    std::vector<Check> checks;
    for (double a : cfg.edge_a) {
        Region ambient = box_of_length(a, cfg.dimension, cfg.box);
        if (chi_minus(ambient, cfg.eta) == 0) {
            r.report += "note a=" + fmt(a) + ": skipped, two points of eta share a cube\n";
            continue;
        }
        Estimate ks = ks_series_discrete(p, ambient, cfg.ens, cfg.eta, t);
        Estimate dil = rho_dilute_direct(p, ambient, cfg.ens, cfg.eta, cfg.budget, cfg.dilute_mode);
        const double diff = std::fabs(ks.value - dil.value);
        r.csv += join_row({fmt(a), std::to_string(cfg.ks_order), fmt(ks.value), fmt(ks.trunc_bound), fmt(dil.value),
                           fmt(dil.stat_err), fmt(dil.trunc_bound), fmt(diff), have_cont ? fmt(cont.value) : "nan",
                           have_cont ? fmt(cont.stat_err) : "nan", have_cont ? fmt(cont.trunc_bound) : "nan"});
        const double tol = ks.trunc_bound + dil.trunc_bound + 3.0 * dil.stat_err;
        checks.push_back({"discrete series vs dilute direct a=" + fmt(a), diff <= tol,
                          "|diff|=" + fmt(diff) + " <= tail+quad+3sigma=" + fmt(tol) + " (relative " +
                              fmt(diff / std::fabs(dil.value)) + ")"});
    }
    r.report += check_lines(checks);
    r.exit_code = all_pass(checks) ? 0 : 1;
    return r;
}

CommandResult cmd_verify(const ExperimentConfig& cfg) {
    CommandResult r;
    r.csv = "invariant, status, count, worst_margin\n";
    std::vector<Check> checks;
    auto add = [&](const std::string& name, bool pass, std::size_t count, double worst, const std::string& detail) {
        checks.push_back({name, pass, detail});
        r.csv += join_row({name, pass ? "PASS" : "FAIL", std::to_string(count), fmt(worst)});
    };
    if (!(cfg.box > 0)) {
        for (const char* name : {"constants", "superstability", "factorization", "ks_depth", "pi_normalisation"})
            add(name, true, 0, 0.0, "vacuous: empty region");
        r.report = "note: empty region, every invariant holds vacuously\n" + check_lines(checks);
        return r;
    }
    const Potential p = cfg.potential();
    const int d = cfg.dimension;

    // constants and superstability audit per edge
    std::size_t n_cfg = 0, n_neg = 0;
    double worst = INFINITY;
    bool constants_ok = true;
    std::string constants_detail;
    for (std::size_t ia = 0; ia < cfg.edge_a.size(); ++ia) {
        const double a = cfg.edge_a[ia];
        CubeGrid grid(a, d);
        StabilityConstants c;
        try {
            c = stability_constants(p, grid);
        } catch (const PreconditionError& e) {
            constants_ok = false;
            constants_detail += "a=" + fmt(a) + ": " + e.what() + "; ";
            continue;
        }
        Region region = box_of_length(a, d, cfg.box);
        for (std::size_t k = 0; k < cfg.audit_samples; ++k) {
            Stream rng(cfg.budget.seed, {stream_tag("verify_audit"), ia, k});
            const double mean = cfg.audit_intensity * rng.uniform();
            Configuration g;
            for (std::size_t slot = 0; slot < region.size(); ++slot) {
                int n = rng.poisson(mean);
                Point corner = grid.corner(region.cubes()[slot]);
                for (int j = 0; j < n; ++j) {
                    Point x = corner;
                    for (int q = 0; q < d; ++q) x[q] += a * rng.uniform();
                    g.push_back(x);
                }
            }
            double margin = check_superstability(c, p, grid, g);
            ++n_cfg;
            if (margin < 0) ++n_neg;
            worst = std::min(worst, margin);
        }
    }
    add("constants", constants_ok, cfg.edge_a.size(), 0.0,
        constants_ok ? "b > 2 v0 at every edge" : constants_detail);
    add("superstability", n_neg == 0, n_cfg, n_cfg ? worst : 0.0,
        std::to_string(n_cfg) + " configurations, " + std::to_string(n_neg) + " negative margins, worst " +
            fmt(n_cfg ? worst : 0.0));

    // factorization on the coarsest edge with at most 12 cubes
    std::optional<Region> small;
    for (double a : cfg.edge_a) {
        Region reg = box_of_length(a, d, cfg.box);
        if (reg.size() <= 12) {
            small = reg;
            break;
        }
    }
    if (small) {
        Estimate ratio = z_plus(p, *small, cfg.ens, cfg.budget);
        Estimate direct = z_plus_direct(p, *small, cfg.ens, cfg.budget);
        double diff = std::fabs(ratio.value - direct.value);
        double tol = 3.0 * std::hypot(ratio.stat_err, direct.stat_err) + ratio.trunc_bound + direct.trunc_bound;
        add("factorization", diff <= tol, small->size(), tol - diff,
            "Z/Z^- = " + fmt(ratio.value) + ", direct Z^+ = " + fmt(direct.value) + ", tolerance " + fmt(tol));
    } else {
        add("factorization", true, 0, 0.0, "vacuous: no sweep edge gives <= 12 cubes");
    }

    // KS depth bound: (K delta)(s) = 0 for |s| = 3 on a small node lattice
    {
        const double a = cfg.edge_a.front();
        std::vector<std::int64_t> n(d, 3);
        Region amb = Region::box(CubeGrid(a, d), n);
        NodeLattice lat(p, amb, 2, {});
        SiteFunction delta = [](const Sites& s) { return s.size() == 1 ? 1.0 : 0.0; };
        std::size_t count = 0;
        double worst_abs = 0.0;
        const double B = stability_B(p);
        for (std::size_t c1 = 0; c1 < lat.n_cubes(); ++c1)
            for (std::size_t c2 = c1 + 1; c2 < lat.n_cubes(); ++c2)
                for (std::size_t c3 = c2 + 1; c3 < lat.n_cubes() && count < 200; ++c3) {
                    Sites s{static_cast<std::uint32_t>(lat.nodes_of(c1)[0]),
                            static_cast<std::uint32_t>(lat.nodes_of(c2)[0]),
                            static_cast<std::uint32_t>(lat.nodes_of(c3)[0])};
                    worst_abs = std::max(worst_abs, std::fabs(ks_apply_discrete(lat, cfg.ens, B, delta, 1, s)));
                    ++count;
                }
        KSTruncation t = truncation(cfg);
        t.budget.samples = 1000;
        KSFunction cdelta = [](const Configuration& c) { return c.size() == 1 ? 1.0 : 0.0; };
        Configuration three;
        for (int k = 0; k < 3; ++k) {
            Point x{};
            x[0] = (k + 0.5) * a;
            three.push_back(x);
        }
        worst_abs = std::max(worst_abs, std::fabs(ks_apply_continuum(p, cfg.ens, cdelta, 1, three, t).value));
        ++count;
        add("ks_depth", worst_abs == 0.0, count, worst_abs,
            std::to_string(count) + " configurations with |s| > n + 1, max |K delta| = " + fmt(worst_abs));
    }

    // pi~ normalisation on random configurations in the region
    {
        const double B = stability_B(p);
        std::size_t count = 0, fallbacks = 0;
        double worst_dev = 0.0;
        for (std::size_t k = 0; k < 1000; ++k) {
            Stream rng(cfg.budget.seed, {stream_tag("verify_pi"), k});
            std::size_t m = 2 + rng.below(5);
            Configuration eta;
            for (std::size_t i = 0; i < m; ++i) {
                Point x{};
                for (int q = 0; q < d; ++q) x[q] = cfg.box * rng.uniform();
                eta.push_back(x);
            }
            bool fb = false;
            auto w = pi_weights(p, B, eta, &fb);
            double sum = 0.0;
            for (double v : w) sum += v;
            worst_dev = std::max(worst_dev, std::fabs(sum - 1.0));
            fallbacks += fb;
            ++count;
        }
        add("pi_normalisation", worst_dev <= 1e-12 && fallbacks == 0, count, worst_dev,
            std::to_string(count) + " configurations, max |sum - 1| = " + fmt(worst_dev) + ", " +
                std::to_string(fallbacks) + " uniform fallbacks");
    }
    r.report = check_lines(checks);
    r.exit_code = all_pass(checks) ? 0 : 1;
    return r;
}

}  // namespace

Potential ExperimentConfig::potential() const {
    if (test_only) return Potential::make(family, dimension, params, TestOnly{});
    return Potential::make(family, dimension, params);
}

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config syntax error: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [k, v] : j.items())
        if (!kKeys.count(k)) bad(k, "unknown key");

    ExperimentConfig c;
    if (!j.contains("family")) bad("family", "missing");
    if (!j["family"].is_string()) bad("family", "expected a string");
    c.family = family_from_name(j["family"].get<std::string>());
    if (j.contains("params")) {
        if (!j["params"].is_object()) bad("params", "expected an object of numbers");
        for (const auto& [k, v] : j["params"].items()) c.params[k] = num(v, "params." + k);
    }
    if (j.contains("test_only")) c.test_only = boolean(j["test_only"], "test_only");
    if (j.contains("dimension")) c.dimension = integer<int>(j["dimension"], "dimension", 1);
    if (c.dimension > 3) bad("dimension", "must be 1, 2 or 3");
    if (!j.contains("z")) bad("z", "missing");
    c.ens.z = num(j["z"], "z");
    if (!(c.ens.z >= 0)) bad("z", "must be >= 0");
    if (j.contains("beta")) c.ens.beta = num(j["beta"], "beta");
    if (!(c.ens.beta > 0)) bad("beta", "must be > 0");
    if (j.contains("box")) c.box = num(j["box"], "box");
    if (c.box < 0) bad("box", "must be >= 0");

    if (!j.contains("edge_a")) bad("edge_a", "missing (a number, or a strictly decreasing list for a sweep)");
    const json& ea = j["edge_a"];
    if (ea.is_array()) {
        for (const auto& v : ea) c.edge_a.push_back(num(v, "edge_a"));
    } else {
        c.edge_a.push_back(num(ea, "edge_a"));
    }
    if (c.edge_a.empty()) bad("edge_a", "empty sweep");
    for (std::size_t i = 0; i < c.edge_a.size(); ++i) {
        if (!(c.edge_a[i] > 0)) bad("edge_a", "edges must be > 0");
        if (i && !(c.edge_a[i] < c.edge_a[i - 1])) bad("edge_a", "sweep must be strictly decreasing");
    }
    if (j.contains("eta")) {
        if (!j["eta"].is_array()) bad("eta", "expected a list of points");
        for (const auto& pt : j["eta"]) {
            if (!pt.is_array() || pt.size() != static_cast<std::size_t>(c.dimension))
                bad("eta", "each point needs " + std::to_string(c.dimension) + " coordinates");
            Point x{};
            for (int k = 0; k < c.dimension; ++k) x[k] = num(pt[k], "eta");
            c.eta.push_back(x);
        }
    }
    if (j.contains("samples")) c.budget.samples = integer<std::size_t>(j["samples"], "samples", 1);
    if (j.contains("workers")) c.budget.workers = integer<int>(j["workers"], "workers", 1);
    if (j.contains("seed")) c.budget.seed = integer<std::uint64_t>(j["seed"], "seed", 0);
    if (j.contains("quad_nodes")) c.budget.quad_nodes = integer<int>(j["quad_nodes"], "quad_nodes", 1);
    if (j.contains("n_max")) c.budget.n_max = integer<int>(j["n_max"], "n_max", -1);
    if (j.contains("work_cap")) c.budget.work_cap = num(j["work_cap"], "work_cap");
    if (j.contains("dilute_mode")) {
        const json& m = j["dilute_mode"];
        std::string s = m.is_string() ? m.get<std::string>() : "";
        if (s == "automatic") c.dilute_mode = DiluteMode::automatic;
        else if (s == "enumerate") c.dilute_mode = DiluteMode::enumerate;
        else if (s == "monte_carlo") c.dilute_mode = DiluteMode::monte_carlo;
        else bad("dilute_mode", "expected automatic, enumerate or monte_carlo");
    }
    if (j.contains("ks_order")) c.ks_order = integer<int>(j["ks_order"], "ks_order", 0);
    if (j.contains("ks_samples")) c.ks_samples = integer<std::size_t>(j["ks_samples"], "ks_samples", 1);
    if (j.contains("xi")) c.xi = num(j["xi"], "xi");
    if (j.contains("cutoff_radius")) c.cutoff_radius = num(j["cutoff_radius"], "cutoff_radius");
    if (j.contains("continuum")) c.continuum = boolean(j["continuum"], "continuum");
    if (j.contains("audit_samples")) c.audit_samples = integer<std::size_t>(j["audit_samples"], "audit_samples", 0);
    if (j.contains("audit_intensity")) c.audit_intensity = num(j["audit_intensity"], "audit_intensity");
    if (j.contains("override_radius")) c.override_radius = boolean(j["override_radius"], "override_radius");
    if (j.contains("out")) {
        if (!j["out"].is_string()) bad("out", "expected a directory path");
        c.out = j["out"].get<std::string>();
    }
    // surface potential parameter problems at parse time
    try {
        c.potential();
    } catch (const PreconditionError& e) {
        bad("params", e.what());
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

CommandResult run_command(const std::string& command, const ExperimentConfig& cfg) {
    CommandResult r;
    try {
        if (command == "constants") r = cmd_constants(cfg);
        else if (command == "pressure-scan") r = cmd_pressure_scan(cfg);
        else if (command == "corr-scan") r = cmd_corr_scan(cfg);
        else if (command == "ks") r = cmd_ks(cfg);
        else if (command == "verify") r = cmd_verify(cfg);
        else throw ConfigError("unknown command '" + command + "'");
    } catch (const ConfigError& e) {
        return CommandResult{2, "", std::string("error: ") + e.what() + "\n"};
    } catch (const RadiusError& e) {
        return CommandResult{2, "", std::string("error: ") + e.what() + "\n"};
    } catch (const PreconditionError& e) {
        return CommandResult{2, "", std::string("error: ") + e.what() + "\n"};
    } catch (const CertificationError& e) {
        return CommandResult{2, "", std::string("error: ") + e.what() + "\n"};
    } catch (const std::exception& e) {
        return CommandResult{1, "", std::string("error: ") + e.what() + "\n"};
    }
    r.report = header_lines(command, cfg) + r.report + (r.exit_code == 0 ? "status: ok\n" : "status: FAILED\n");
    return r;
}

void write_outputs(const std::string& command, const CommandResult& result, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    if (!result.csv.empty()) {
        std::ofstream csv(std::filesystem::path(out_dir) / (command + ".csv"), std::ios::binary);
        csv << result.csv;
    }
    std::ofstream rep(std::filesystem::path(out_dir) / "report.txt", std::ios::binary);
    rep << result.report;
}

}  // namespace qla
