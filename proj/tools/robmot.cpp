// robmot: model-free bounds and robust indifference prices from the shell.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "robmot/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Model-free bounds and robust utility indifference prices on a path lattice"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::uint64_t seed = 0;
    double tol = 0.0;
    std::size_t max_paths = 100'000;
    std::string out;
    auto* seed_opt = app.add_option("--seed", seed, "seed for every randomized component")->capture_default_str();
    auto* tol_opt = app.add_option("--tol", tol, "solver tolerance (overrides the instance file)");
    app.add_option("--max-paths", max_paths, "refuse lattices with more paths")->capture_default_str();
    app.add_option("--out", out, "write the report here instead of standard output");

    std::string path;
    const std::pair<const char*, const char*> commands[] = {
        {"validate", "marginal feasibility: convex order and the polytope LP"},
        {"mot", "model-free lower and upper bounds of the payoff"},
        {"price", "full pricing report"},
        {"verify", "property checks on a small instance"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("instance", path, "instance file (JSON)")->required();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : robmot::cli::kParse;
    }

    robmot::cli::RunOptions opts;
    if (seed_opt->count()) opts.seed = seed;
    if (tol_opt->count()) opts.tolerance = tol;
    opts.max_paths = max_paths;

    const auto res = robmot::cli::run(app.get_subcommands().front()->get_name(), path, opts);
    const std::string text = res.report.dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(out);
        if (!f) {
            std::cerr << "cannot write " << out << "\n";
            return robmot::cli::kParse;
        }
        f << text;
    }
    if (res.exit_code != 0 && res.report.contains("error"))
        std::cerr << res.report["error"]["message"].get<std::string>() << "\n";
    return res.exit_code;
}
