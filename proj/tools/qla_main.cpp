#include <CLI11.hpp>
#include <iostream>

#include "qla/cli.hpp"
#include "qla/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"quasi-lattice approximation experiments"};
    std::string command, config, out;
    std::uint64_t seed = 0;
    bool override_radius = false;
    app.add_option("command", command, "constants | pressure-scan | corr-scan | ks | verify")
        ->required()
        ->check(CLI::IsMember({"constants", "pressure-scan", "corr-scan", "ks", "verify"}));
    app.add_option("--config", config, "JSON experiment config")->required();
    auto* out_opt = app.add_option("--out", out, "output directory (overrides the config)");
    auto* seed_opt = app.add_option("--seed", seed, "random seed (overrides the config)");
    app.add_flag("--override-radius", override_radius, "run KS series above the convergence radius");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    qla::ExperimentConfig cfg;
    try {
        cfg = qla::load_config(config);
    } catch (const qla::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    if (*out_opt) cfg.out = out;
    if (*seed_opt) cfg.budget.seed = seed;
    if (override_radius) cfg.override_radius = true;

    qla::CommandResult r = qla::run_command(command, cfg);
    try {
        qla::write_outputs(command, r, cfg.out);
    } catch (const std::exception& e) {
        std::cerr << "error: cannot write outputs: " << e.what() << "\n";
        return 2;
    }
    std::cout << r.report;
    return r.exit_code;
}
