#include <cmath>
#include <sstream>
#include <string>

#include "doctest.h"
#include "qla/cli.hpp"
#include "qla/energy.hpp"
#include "qla/errors.hpp"

using namespace qla;

namespace {

const char* kRep = R"("family": "pure-repulsive", "params": {"c_r": 1.0, "s": 2.0}, "dimension": 1)";

std::string cfg(const std::string& body) { return std::string("{") + kRep + ", " + body + "}"; }

std::string config_error(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

// Column `col` of data row `row` (0-based, header excluded).
double csv_cell(const std::string& csv, int row, int col) {
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    for (int i = 0; i <= row; ++i) std::getline(in, line);
    std::istringstream cells(line);
    std::string cell;
    for (int i = 0; i <= col; ++i) std::getline(cells, cell, ',');
    return std::stod(cell);
}

}  // namespace

TEST_CASE("config parsing fills the experiment") {
    auto c = parse_config(cfg(R"("z": 0.3, "beta": 2, "box": 4, "edge_a": [0.5, 0.25], "eta": [[1.1]],
                                 "workers": 3, "seed": 9, "dilute_mode": "enumerate", "override_radius": true)"));
    CHECK(c.ens.z == 0.3);
    CHECK(c.ens.beta == 2.0);
    CHECK(c.edge_a.size() == 2);
    CHECK(c.eta.size() == 1);
    CHECK(c.eta[0][0] == 1.1);
    CHECK(c.budget.workers == 3);
    CHECK(c.budget.seed == 9);
    CHECK(c.dilute_mode == DiluteMode::enumerate);
    CHECK(c.override_radius);
    CHECK(c.potential().family() == Family::pure_repulsive);
}

TEST_CASE("config errors name the key") {
    CHECK(config_error(cfg(R"("z": 0.3, "edge_a": 0.5, "colour": 1)")).find("'colour'") != std::string::npos);
    CHECK(config_error(cfg(R"("z": 0.3)")).find("'edge_a'") != std::string::npos);
    CHECK(config_error(cfg(R"("z": 0.3, "edge_a": [0.2, 0.4])")).find("strictly decreasing") != std::string::npos);
    CHECK(config_error(cfg(R"("z": -1, "edge_a": 0.5)")).find("'z'") != std::string::npos);
    CHECK(config_error(cfg(R"("z": 0.3, "edge_a": 0.5, "eta": [[1, 2]])")).find("'eta'") != std::string::npos);
    CHECK(config_error(R"({"family": "square-well", "z": 1, "edge_a": 0.5})").find("square-well") !=
          std::string::npos);
    CHECK(config_error(R"({"family": "zero", "z": 1, "edge_a": 0.5})") != "");
    std::string syntax = config_error("{\"z\": 1,\n \"edge_a\" 0.5}");
    CHECK(syntax.find("line 2") != std::string::npos);
}

TEST_CASE("fmt round-trips doubles") {
    for (double x : {0.1, 1.0 / 3.0, 6.02e23, -2.5e-300}) CHECK(std::stod(fmt(x)) == x);
}

TEST_CASE("pressure-scan on the ideal gas") {
    auto c = parse_config(R"({"family": "zero", "test_only": true, "z": 0.5, "box": 2, "edge_a": [1.0, 0.5]})");
    auto r = run_command("pressure-scan", c);
    REQUIRE(r.exit_code == 0);
    CHECK(r.csv.rfind("a, n_cubes, volume, p_full, p_full_err, p_minus, p_minus_err, p_plus, p_plus_err, eps1, bound\n",
                      0) == 0);
    // p_full = z, p_minus = log(1 + z a) / a
    CHECK(csv_cell(r.csv, 0, 3) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(csv_cell(r.csv, 0, 5) == doctest::Approx(std::log(1.5)).epsilon(1e-12));
    CHECK(csv_cell(r.csv, 1, 5) == doctest::Approx(std::log(1.25) / 0.5).epsilon(1e-12));
}

TEST_CASE("corr-scan radius contract and override") {
    auto c = parse_config(cfg(R"("z": 0.5, "box": 2, "edge_a": [0.5, 0.25], "eta": [[1.1]], "samples": 2000)"));
    auto r = run_command("corr-scan", c);
    CHECK(r.exit_code == 2);
    CHECK(r.report.find("radius") != std::string::npos);
    CHECK(r.csv.empty());
    c.override_radius = true;
    r = run_command("corr-scan", c);
    CHECK(r.exit_code == 0);
    CHECK(r.csv.rfind("a, rho_full, rho_full_err, rho_minus, rho_minus_err, diff, remainder_R, z_ratio\n", 0) == 0);
}

TEST_CASE("commands are deterministic across worker counts") {
    auto c = parse_config(cfg(R"("z": 0.5, "box": 2, "edge_a": [0.5, 0.25], "eta": [[1.1]], "samples": 3000,
                                 "override_radius": true, "seed": 5)"));
    for (const char* cmd : {"pressure-scan", "corr-scan"}) {
        c.budget.workers = 1;
        auto one = run_command(cmd, c);
        c.budget.workers = 3;
        auto three = run_command(cmd, c);
        CHECK(one.csv == three.csv);
        CHECK(!one.csv.empty());
    }
}

TEST_CASE("ks agrees with the dilute enumeration") {
    auto c = parse_config(cfg(R"("z": 0.05, "box": 2, "edge_a": 0.5, "eta": [[0.3], [1.3]], "quad_nodes": 4,
                                 "ks_order": 5, "continuum": false)"));
    auto r = run_command("ks", c);
    CHECK(r.exit_code == 0);
    CHECK(r.report.find("PASS discrete series") != std::string::npos);
    // two points in one cube: skipped with a note
    c.eta = {Point{0.1, 0, 0}, Point{0.2, 0, 0}};
    r = run_command("ks", c);
    CHECK(r.report.find("skipped") != std::string::npos);
}

TEST_CASE("verify passes on a repulsive system and is vacuous on an empty region") {
    auto c = parse_config(cfg(R"("z": 0.05, "box": 2, "edge_a": [0.5, 0.4], "samples": 4000, "audit_samples": 500)"));
    auto r = run_command("verify", c);
    CHECK(r.exit_code == 0);
    CHECK(r.csv.find("superstability, PASS, 1000,") != std::string::npos);
    c.box = 0;
    r = run_command("verify", c);
    CHECK(r.exit_code == 0);
    CHECK(r.report.find("vacuous") != std::string::npos);
}

TEST_CASE("verify flags an edge too coarse for superstability") {
    auto p = Potential::power_core_with_tail(1, 1.0, 4.0, 0.1, 1.0);
    const double above = global_bounds(p).a_m * 1.01;
    REQUIRE(above < certify_assumption_a(p).r0);
    std::string text = R"({"family": "power-core-with-tail", "params": {"c_r": 1, "s": 4, "c_a": 0.1, "eps0": 1},
                           "z": 0.05, "box": )" + fmt(4 * above) + R"(, "edge_a": )" + fmt(above) +
                       R"(, "samples": 2000, "audit_samples": 100})";
    auto r = run_command("verify", parse_config(text));
    CHECK(r.exit_code == 1);
    CHECK(r.report.find("FAIL constants") != std::string::npos);
    CHECK(r.report.find("coarse") != std::string::npos);
}
