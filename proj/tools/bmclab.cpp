#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "bmc/experiment.hpp"
#include "bmc/version.hpp"

// bmclab <subcommand> --config FILE [--seed N] [--threads N] [--out DIR]
//
// Subcommands: simulate, oracle, variance, clt, supercritical, regimes.
// BMCLAB_OUT sets the default output directory.

int main(int argc, char** argv) {
    CLI::App app{"bifurcating-chain simulation and verification lab"};
    app.set_version_flag("--version", bmc::kVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed_override = 0;
    bool have_seed = false;
    int threads_override = 0;
    bool have_threads = false;
    std::string out_override;

    const char* env_out = std::getenv("BMCLAB_OUT");

    std::vector<CLI::App*> subs;
    for (const char* name : {"simulate", "oracle", "variance", "clt",
                             "supercritical", "regimes"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "experiment config file")
            ->required();
        sub->add_option("--seed", seed_override, "override [run] seed")
            ->each([&](const std::string&) { have_seed = true; });
        sub->add_option("--threads", threads_override, "override [run] threads")
            ->each([&](const std::string&) { have_threads = true; });
        sub->add_option("--out", out_override, "output directory");
        subs.push_back(sub);
    }

    CLI11_PARSE(app, argc, argv);

    bmc::ExperimentConfig cfg;
    try {
        cfg = bmc::ExperimentConfig::load(config_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return bmc::exit_config_error;
    }
    if (have_seed) cfg.seed = seed_override;
    if (have_threads) cfg.threads = threads_override;
    if (!out_override.empty())
        cfg.out_dir = out_override;
    else if (env_out && *env_out && cfg.out_dir == "out")
        cfg.out_dir = env_out;

    const std::string sub = app.get_subcommands().front()->get_name();
    return bmc::run_experiment(sub, cfg, std::cerr);
}
