#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bsv/config.hpp"
#include "bsv/scenarios.hpp"
#include "bsv/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"bsvsim - spectral statistics of high-gain parametric down-conversion"};
    app.set_version_flag("--version", bsv::kVersion);

    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    unsigned workers = 1;
    bool coarse = false;

    app.add_option("--config", config_path, "experiment config file (INI-style)");
    app.add_option("--out", out_dir, "output directory for artifacts");
    app.add_option("--seed", seed, "override run.seed")->each([&](const std::string&) {
        seed_set = true;
    });
    app.add_option("--workers", workers, "worker threads for the frame simulation");
    app.add_flag("--coarse", coarse, "decimate map grids x10 for fast runs");

    std::string scenario;
    for (const auto& name : bsv::scenario_names()) {
        auto* sub = app.add_subcommand(name);
        sub->callback([&scenario, name] { scenario = name; });
    }
    app.require_subcommand(0, 1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : bsv::kExitConfigError;
    }

    if (scenario.empty()) {
        std::cerr << app.help() << "\nscenario required; one of:";
        for (const auto& n : bsv::scenario_names()) std::cerr << ' ' << n;
        std::cerr << "\n";
        return bsv::kExitConfigError;
    }

    bsv::ExperimentConfig cfg;
    if (!config_path.empty()) {
        try {
            cfg = bsv::parse_config(config_path);
        } catch (const std::exception& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return bsv::kExitConfigError;
        }
    }

    bsv::RunOptions opts;
    if (seed_set) opts.seed = seed;
    opts.workers = workers;
    opts.coarse = coarse;
    return bsv::run_scenario(scenario, cfg, out_dir, opts);
}
