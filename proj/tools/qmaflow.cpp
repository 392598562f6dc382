#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qmaflow/error.hpp"
#include "qmaflow/harness.hpp"
#include "qmaflow/json_format.hpp"

int main(int argc, char** argv) {
    CLI::App app{"qmaflow: quaternionic Monge-Ampere flow on flat hyperkaehler tori"};
    std::string mode_name;
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
    app.add_option("mode", mode_name, "solve, cr-flow, verify or oracle")
        ->required()
        ->check(CLI::IsMember({"solve", "cr-flow", "verify", "oracle"}));
    app.add_option("--config", config_path, "run configuration (JSON)")->required();
    app.add_option("--out", out_dir, "output directory (overrides the config)");
    app.add_option("--seed", seed, "seed for random data (overrides the config)");
    app.add_flag("--quiet", quiet, "suppress progress output");
    CLI11_PARSE(app, argc, argv);

    qmaflow::RunConfig cfg;
    try {
        cfg = qmaflow::parse_config(config_path, qmaflow::mode_from_string(mode_name));
    } catch (const qmaflow::ConfigError& e) {
        std::cerr << qmaflow::dump17({{"error", "config"}, {"pointer", e.pointer()}, {"message", e.what()}}) << '\n';
        return qmaflow::exit_config;
    }
    if (out_dir) cfg.out_dir = *out_dir;
    if (seed) qmaflow::override_seed(cfg, *seed);

    try {
        const qmaflow::RunOutcome outcome = qmaflow::run(cfg, quiet ? nullptr : &std::cerr);
        if (outcome.error) std::cerr << qmaflow::dump17(*outcome.error) << '\n';
        return outcome.exit_code;
    } catch (const std::exception& e) {
        std::cerr << qmaflow::dump17({{"error", "internal"}, {"message", e.what()}}) << '\n';
        return qmaflow::exit_internal;
    }
}
