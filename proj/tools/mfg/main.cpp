#include <cstdlib>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mfg/commands.hpp"
#include "mfg/config.hpp"

namespace {

struct Options {
    std::string config;
    std::string out_dir = ".";
    bool quiet = false;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<double> dt_sim;
    std::optional<double> tol;
    std::optional<std::size_t> workers;
    std::optional<std::size_t> dump_paths;
    std::optional<std::string> param;
    std::optional<double> from;
    std::optional<double> to;
    std::optional<std::size_t> steps;
};

void add_common(CLI::App* sub, Options& o) {
    sub->add_option("--config", o.config, "Instance config file")->required();
    sub->add_option("--out-dir", o.out_dir, "Directory for CSVs and reports");
    sub->add_option("--seed", o.seed, "RNG seed (overrides MFG_SEED and the config)");
    sub->add_option("--paths", o.paths, "Monte Carlo paths");
    sub->add_option("--dt-sim", o.dt_sim, "Simulation step");
    sub->add_option("--tol", o.tol, "Picard tolerance");
    sub->add_option("--workers", o.workers, "Worker threads (0 = all cores)");
    sub->add_option("--dump-paths", o.dump_paths, "Write the first N simulated paths");
    sub->add_flag("--quiet", o.quiet, "Print only the summary");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scalar linear-quadratic mean-field game solver"};
    app.require_subcommand(1);
    Options o;
    auto* solve = app.add_subcommand("solve", "Solve the equilibrium and write trajectories");
    auto* verify = app.add_subcommand("verify", "Monte Carlo checks of the equilibrium");
    auto* sweep = app.add_subcommand("sweep", "Admissibility and contraction over a parameter range");
    auto* check = app.add_subcommand("check", "Admissibility and contraction constants only");
    for (auto* s : {solve, verify, sweep, check}) add_common(s, o);
    sweep->add_option("--param", o.param, "theta | c | T | qbar-scale");
    sweep->add_option("--from", o.from, "First value");
    sweep->add_option("--to", o.to, "Last value");
    sweep->add_option("--steps", o.steps, "Number of values");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : mfg::cli::kConfigError;
    }

    try {
        mfg::cli::Overrides ov;
        ov.out_dir = o.out_dir;
        ov.quiet = o.quiet;
        ov.seed = o.seed;
        ov.paths = o.paths;
        ov.dt_sim = o.dt_sim;
        ov.tol = o.tol;
        ov.workers = o.workers;
        ov.dump_paths = o.dump_paths;
        ov.sweep_parameter = o.param;
        ov.sweep_from = o.from;
        ov.sweep_to = o.to;
        ov.sweep_steps = o.steps;
        const auto cfg =
            mfg::cli::apply_overrides(mfg::cli::load_config(o.config), ov, std::getenv("MFG_SEED"));

        mfg::cli::CommandResult res;
        if (solve->parsed()) res = mfg::cli::cmd_solve(cfg, ov.out_dir);
        if (verify->parsed()) res = mfg::cli::cmd_verify(cfg, ov.out_dir);
        if (sweep->parsed()) res = mfg::cli::cmd_sweep(cfg, ov.out_dir);
        if (check->parsed()) res = mfg::cli::cmd_check(cfg, ov.out_dir);

        std::cout << (o.quiet ? res.report.summary_text() : res.report.text());
        return res.exit_code;
    } catch (const mfg::cli::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return mfg::cli::kConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return mfg::cli::kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return EXIT_FAILURE;
    }
}
