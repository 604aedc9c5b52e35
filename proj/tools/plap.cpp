#include "plap/cli/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"Finite element experiments for the p-Laplacian with L1 data"};
    app.require_subcommand(1, 1);

    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    for (std::string_view name : plap::cli::kCommands) {
        CLI::App* sub = app.add_subcommand(std::string(name));
        sub->add_option("--config", config, "JSON config (schema plap-config/1)")->required();
        sub->add_option("--out", out, "output directory (overrides the config)");
        sub->add_option("--seed", seed, "seed for the randomized sweeps (overrides the config)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : plap::cli::kExitConfig;
    }

    const CLI::App* sub = app.get_subcommands().front();
    plap::cli::RunOptions options;
    options.command = sub->get_name();
    options.config_path = config;
    if (sub->count("--out") > 0)
        options.out_dir = out;
    if (sub->count("--seed") > 0)
        options.seed = seed;
    return plap::cli::run(options, std::cout, std::cerr);
}
