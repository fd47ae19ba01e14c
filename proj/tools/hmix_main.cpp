#include <CLI11.hpp>

#include <Eigen/Core>

#include "hmix/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"hmix: Dirichlet solver for mixed complex Hessian quotient equations "
                 "on box domains, with runtime verification of the operator's "
                 "cone, concavity and trace identities"};
    app.require_subcommand(1);

    hmix::cli::Options opt;

    const auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* c = cmd->add_option("--config", opt.config, "problem configuration JSON");
        if (needs_config) c->required();
        cmd->add_option("--out", opt.out, "output directory (default: out)");
        cmd->add_option("--seed", opt.seed, "seed for randomized suites (default: 42)");
        cmd->add_option("--grid-scale", opt.grid_scale,
                        "refinement multiplier applied to (shape - 1) on every axis");
        cmd->add_option("--max-threads", opt.max_threads,
                        "cap internal linear algebra threads (0 = default)");
    };

    CLI::App* solve = app.add_subcommand("solve", "run the continuity-method solve");
    add_common(solve, true);
    CLI::App* check = app.add_subcommand("check", "validate problem invariants and margins");
    add_common(check, true);
    CLI::App* suite = app.add_subcommand(
        "suite", "run a property suite: symfun | spectral | operator | convergence");
    suite->add_option("name", opt.suite_name, "suite name")->required();
    add_common(suite, false);
    CLI::App* manufacture =
        app.add_subcommand("manufacture", "expand and verify a manufactured-solution config");
    add_common(manufacture, true);

    CLI11_PARSE(app, argc, argv);

    if (opt.max_threads > 0) Eigen::setNbThreads(opt.max_threads);

    try {
        if (solve->parsed()) return hmix::cli::run_solve(opt);
        if (check->parsed()) return hmix::cli::run_check(opt);
        if (suite->parsed()) return hmix::cli::run_suite(opt);
        if (manufacture->parsed()) return hmix::cli::run_manufacture(opt);
    } catch (const std::exception& e) {
        hmix::cli::detail::write_error(opt.out, "internal", e.what());
        return 1;
    }
    return 1;
}
