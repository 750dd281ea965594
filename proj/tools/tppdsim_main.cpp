// Experiment driver: runs single experiments, defense/benchmark matrices,
// and built-in self checks from JSON config files.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tppdsim/experiment.hpp"

namespace {

int log_level() {
    const char* env = std::getenv("TPPDSIM_LOG");
    if (!env)
        return 1;
    const std::string v(env);
    if (v == "quiet")
        return 0;
    if (v == "debug")
        return 2;
    return 1;
}

struct CommonFlags {
    std::string config_path;
    std::string defense;
    std::size_t z = 0;
    bool z_set = false;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir;

    tppd::ConfigOverrides overrides() const {
        tppd::ConfigOverrides o;
        if (!defense.empty())
            o.defense = defense;
        if (z_set)
            o.z = z;
        if (seed_set)
            o.seed = seed;
        if (!out_dir.empty())
            o.out_dir = out_dir;
        return o;
    }
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("config", flags.config_path, "experiment config file (JSON)")
        ->required();
    cmd->add_option("--defense", flags.defense, "override the defense: none, tppd or nomo");
    cmd->add_option("--z", flags.z, "override the tppd partition floor")
        ->each([&flags](const std::string&) { flags.z_set = true; });
    cmd->add_option("--seed", flags.seed, "override the experiment seed")
        ->each([&flags](const std::string&) { flags.seed_set = true; });
    cmd->add_option("--out", flags.out_dir, "override the output directory");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"trace-driven LLC covert-channel simulator with targeted"
                 " pseudo-partitioning"};
    app.require_subcommand(1);

    CommonFlags run_flags, matrix_flags, selfcheck_flags;
    CLI::App* run_cmd = app.add_subcommand("run", "run one experiment and write reports");
    add_common_flags(run_cmd, run_flags);
    CLI::App* matrix_cmd =
        app.add_subcommand("matrix", "run a defense x benchmark matrix and write the"
                           " impact table");
    add_common_flags(matrix_cmd, matrix_flags);
    CLI::App* selfcheck_cmd =
        app.add_subcommand("selfcheck", "run built-in consistency checks on a config");
    add_common_flags(selfcheck_cmd, selfcheck_flags);

    CLI11_PARSE(app, argc, argv);
    const int verbosity = log_level();

    try {
        if (run_cmd->parsed()) {
            const auto config =
                tppd::load_experiment_config(run_flags.config_path, run_flags.overrides());
            if (verbosity >= 1)
                std::cerr << "running " << config.name << " with defense "
                          << config.defense.describe() << "\n";
            const auto result = tppd::run_experiment(config);
            tppd::write_reports(config, result);
            if (verbosity >= 1) {
                std::cerr << "llc misses: " << result.stats.llc_misses << " / "
                          << result.stats.llc_lookups << " lookups\n";
                if (result.channel)
                    std::cerr << "channel accuracy: " << result.channel->accuracy() << "\n";
                std::cerr << "reports written to " << config.out_dir << "\n";
            }
        } else if (matrix_cmd->parsed()) {
            const auto config =
                tppd::load_matrix_config(matrix_flags.config_path, matrix_flags.overrides());
            const auto table = tppd::run_matrix(config);
            tppd::write_matrix_report(config, table);
            if (verbosity >= 1)
                std::cerr << "impact table written to " << config.base.out_dir << "\n";
        } else if (selfcheck_cmd->parsed()) {
            const auto config = tppd::load_experiment_config(selfcheck_flags.config_path,
                                                             selfcheck_flags.overrides());
            if (!tppd::selfcheck(config, std::cout))
                return 3;
        }
    } catch (const tppd::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const tppd::SimError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
