#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "attrition/io.hpp"
#include "attrition/rational.hpp"
#include "attrition/run.hpp"

using namespace attrition;

int main(int argc, char** argv) {
    CLI::App app{"Desk-scale laboratory for sequential mediated learning with a "
                 "depletable signal supply"};
    app.require_subcommand(1);

    RunOptions opts;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> episodes;
    app.add_option("--config", opts.config_path, "experiment config (JSON)")
        ->envname("ATTRITION_CONFIG");
    app.add_option("--out", opts.out_dir, "output directory (default: out)")
        ->envname("ATTRITION_OUT");
    app.add_option("--seed", seed, "seed override")->envname("ATTRITION_SEED");
    app.add_option("--jobs", opts.jobs, "worker threads")->envname("ATTRITION_JOBS");

    auto* thresholds =
        app.add_subcommand("thresholds", "closed-form constants and the supply certificate");
    auto* grid = app.add_subcommand("grid", "belief ladder and boundary exit probabilities");
    std::string p0, plo, phi, pi;
    grid->add_option("--p0", p0, "prior belief (rational literal)");
    grid->add_option("--plo", plo, "lower absorbing bound");
    grid->add_option("--phi", phi, "upper absorbing bound");
    grid->add_option("--pi", pi, "signal precision");
    auto* design =
        app.add_subcommand("design", "outcome-contingent payment scheme and its incentive audit");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo episodes under the scheme");
    simulate->add_option("--n", episodes, "episode count override");
    auto* oracle =
        app.add_subcommand("oracle", "exhaustive analysis of a small finite truncation");
    oracle->add_option("--tables", opts.tables,
                       "compensation tables: random:<n> or a JSON file (default random:16)");
    auto* witness = app.add_subcommand("witness", "preference-shock bound tables and certificates");
    auto* all = app.add_subcommand("all", "every stage the config covers, plus a joint report");
    for (auto* sub : {thresholds, grid, design, simulate, oracle, witness, all})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInvalidConfig;
    }

    opts.seed = seed;
    opts.episodes = episodes;
    const std::string sub = app.get_subcommands().front()->get_name();

    if (sub == "grid" && !(p0.empty() && plo.empty() && phi.empty() && pi.empty())) {
        if (p0.empty() || plo.empty() || phi.empty() || pi.empty()) {
            std::cerr << "grid: --p0, --plo, --phi and --pi must be given together\n";
            return kExitInvalidConfig;
        }
        try {
            opts.grid_args =
                GridArgs{parse_rational(p0), parse_rational(plo), parse_rational(phi),
                         parse_rational(pi)};
        } catch (const std::invalid_argument& e) {
            std::cerr << "grid: " << e.what() << "\n";
            return kExitInvalidConfig;
        }
    }

    const int code = run_command(sub, opts);

    // The inspection subcommands also stream their primary artifact.
    if (code == kExitOk && (sub == "thresholds" || sub == "grid")) {
        const char* artifact = sub == "thresholds" ? "report.json" : "grid.csv";
        try {
            std::cout << read_text_file(std::filesystem::path(opts.out_dir) / artifact);
        } catch (const std::exception& e) {
            std::cerr << e.what() << "\n";
        }
    }
    return code;
}
