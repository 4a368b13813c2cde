// popgame: solver and simulator for the clean-technology adoption population
// game. Subcommands wrap the library operations; all numeric output goes to
// files in the output directory, with a manifest recording the canonical
// config and seeds.

#include <functional>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "popgame/cli/commands.hpp"
#include "popgame/cli/config.hpp"

namespace {

struct SharedArgs {
    std::string config_path;
    std::string out_dir;
    std::string format;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool strict = false;
    bool exact = false;
};

void add_shared(CLI::App* sub, SharedArgs& args) {
    sub->add_option("--config", args.config_path, "run configuration file (text or JSON)")
        ->required();
    sub->add_option("--out", args.out_dir, "output directory (overrides output.dir)");
    sub->add_option("--format", args.format, "output format: csv or json");
    sub->add_option("--seed", args.seed, "seed override for stochastic runs")
        ->each([&args](const std::string&) { args.seed_set = true; });
    sub->add_flag("--strict", args.strict, "fail when convergence thresholds are missed");
    sub->add_flag("--exact", args.exact, "sweep grids include exact axis endpoints");
}

int dispatch(const SharedArgs& args,
             int (*cmd)(const popgame::cli::RunConfig&, const popgame::cli::CliOptions&)) {
    using namespace popgame::cli;
    RunConfig cfg;
    try {
        cfg = parse_config_file(args.config_path);
    } catch (const ConfigError& e) {
        log_error(e.what());
        return kConfigError;
    }
    CliOptions opt;
    if (!args.out_dir.empty()) opt.out_dir = args.out_dir;
    if (!args.format.empty()) opt.format = args.format;
    if (args.seed_set) opt.seed = args.seed;
    opt.strict = args.strict;
    opt.exact = args.exact;
    return cmd(cfg, opt);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"solver and simulator for clean-technology adoption population games"};
    app.set_version_flag("--version", std::string(popgame::kVersion));
    app.require_subcommand(1);

    struct Entry {
        const char* name;
        const char* help;
        int (*cmd)(const popgame::cli::RunConfig&, const popgame::cli::CliOptions&);
    };
    const Entry entries[] = {
        {"equilibria", "enumerate all equilibria with stability flags", popgame::cli::cmd_equilibria},
        {"stable-set", "closed-form stable set for the configured regime", popgame::cli::cmd_stable_set},
        {"simulate", "one turn-by-turn adoption trajectory", popgame::cli::cmd_simulate},
        {"monte-carlo", "batch of runs matched against the stable set", popgame::cli::cmd_monte_carlo},
        {"replicator", "replicator flow trajectory and phase-line classification",
         popgame::cli::cmd_replicator},
        {"env-integrate", "concentration trajectory at a fixed adoption level",
         popgame::cli::cmd_env_integrate},
        {"env-verify", "check that environmental coupling leaves the stable set unchanged",
         popgame::cli::cmd_env_verify},
        {"sweep", "stable sets over a 1- or 2-axis parameter grid", popgame::cli::cmd_sweep},
    };

    SharedArgs args[std::size(entries)];
    int selected = -1;
    for (std::size_t i = 0; i < std::size(entries); ++i) {
        CLI::App* sub = app.add_subcommand(entries[i].name, entries[i].help);
        add_shared(sub, args[i]);
        sub->callback([&selected, i] { selected = static_cast<int>(i); });
    }

    CLI11_PARSE(app, argc, argv);
    if (selected < 0) return popgame::cli::kConfigError;
    return dispatch(args[selected], entries[selected].cmd);
}
