#include <CLI11.hpp>

#include "relnet/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"relnet: throughput, stability and relay-delay analysis for a two-relay "
                 "cooperative random-access network"};
    app.require_subcommand(1);

    relnet::CliOverrides overrides;
    std::uint64_t seed = 0;
    int grid = 0, reps = 0;
    std::string out;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "RNG seed");
        cmd->add_option("--grid-size", grid, "boundary integral grid size (even)");
        cmd->add_option("--reps", reps, "simulation replications");
        cmd->add_option("--out", out, "output directory");
        cmd->add_flag("--verbose", overrides.verbose, "chatty progress output");
    };

    std::string scenario_path;
    auto* run_cmd = app.add_subcommand("run", "execute a scenario file");
    run_cmd->add_option("scenario", scenario_path, "scenario file")->required();
    add_common(run_cmd);

    std::string compare_path;
    auto* cmp_cmd = app.add_subcommand("compare", "analytic vs simulation over a scenario grid");
    cmp_cmd->add_option("scenario", compare_path, "scenario file")->required();
    add_common(cmp_cmd);

    std::string figure_id;
    auto* fig_cmd = app.add_subcommand("figure", "emit a named figure's data and gnuplot script");
    fig_cmd->add_option("id", figure_id, "figure id (see --list)");
    bool list = false;
    fig_cmd->add_flag("--list", list, "list known figure ids");
    add_common(fig_cmd);

    CLI11_PARSE(app, argc, argv);

    auto finalize = [&](CLI::App* cmd) {
        if (cmd->count("--seed")) overrides.seed = seed;
        if (cmd->count("--grid-size")) overrides.grid_size = grid;
        if (cmd->count("--reps")) overrides.replications = reps;
        if (cmd->count("--out")) overrides.out_dir = out;
    };

    if (run_cmd->parsed()) {
        finalize(run_cmd);
        return relnet::run_scenario(scenario_path, overrides);
    }
    if (cmp_cmd->parsed()) {
        finalize(cmp_cmd);
        return relnet::run_compare(compare_path, overrides);
    }
    if (fig_cmd->parsed()) {
        finalize(fig_cmd);
        if (list) {
            for (const auto& id : relnet::figure_ids()) std::printf("%s\n", id.c_str());
            return 0;
        }
        if (figure_id.empty()) {
            std::fprintf(stderr, "error: figure id required (try --list)\n");
            return relnet::kExitSchema;
        }
        return relnet::run_figure(figure_id, overrides);
    }
    return 0;
}
