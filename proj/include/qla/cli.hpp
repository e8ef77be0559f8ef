#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qla/lattice.hpp"
#include "qla/potential.hpp"
#include "qla/sampling.hpp"

namespace qla {

struct ExperimentConfig {
    Family family = Family::pure_repulsive;
    std::map<std::string, double> params;
    bool test_only = false;  // admits the zero and hard-core stubs
    int dimension = 1;
    EnsembleParams ens;
    double box = 0.0;               // region side length
    std::vector<double> edge_a;     // one edge or a strictly decreasing sweep
    Configuration eta;
    Budget budget;
    DiluteMode dilute_mode = DiluteMode::automatic;
    int ks_order = 4;
    std::size_t ks_samples = 20000;
    double xi = -1.0;
    double cutoff_radius = -1.0;
    bool continuum = true;          // ks: also run the continuum series
    std::size_t audit_samples = 10000;
    double audit_intensity = 5.0;   // max Poisson mean per cube in the audit
    bool override_radius = false;
    std::string out = "out";

    Potential potential() const;
};

// Throws ConfigError naming the offending key, or the line and column of a
// syntax error.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

struct CommandResult {
    int exit_code = 0;   // 0 ok, 1 assertion failure, 2 config error
    std::string csv;     // empty when the command writes none
    std::string report;
};

// Runs one of constants | pressure-scan | corr-scan | ks | verify. Library
// errors are mapped to exit codes and reported, not thrown.
CommandResult run_command(const std::string& command, const ExperimentConfig& cfg);

// Writes <out>/<command>.csv (when non-empty) and <out>/report.txt.
void write_outputs(const std::string& command, const CommandResult& result, const std::string& out_dir);

// "%.17g"
std::string fmt(double x);

}  // namespace qla
