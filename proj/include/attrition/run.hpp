#ifndef ATTRITION_RUN_HPP
#define ATTRITION_RUN_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "attrition/rational.hpp"

namespace attrition {

/// Direct grid parameters for the grid subcommand; a config file is not
/// required when these are given.
struct GridArgs {
    Rat p0, p_lo, p_hi, pi;
};

struct RunOptions {
    std::string config_path;  ///< empty when no --config was given
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;     ///< overrides the config seed
    unsigned jobs = 1;
    std::optional<std::size_t> episodes;   ///< overrides sim.episodes
    std::string tables = "random:16";      ///< oracle tables: "random:<n>" or a JSON file path
    std::optional<GridArgs> grid_args;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalidConfig = 1;
inline constexpr int kExitVerificationFailure = 2;

/**
 * Executes one subcommand end to end: loads and validates the config, runs
 * the stage, writes its artifacts plus manifest.json under out_dir, and maps
 * failures to errors.json with the documented exit codes (0 success, 1
 * invalid config or I/O trouble, 2 a verification the stage performs failed,
 * e.g. incentive compatibility or a certified bound). Subcommands:
 * thresholds, grid, design, simulate, oracle, witness, all.
 */
int run_command(const std::string& subcommand, const RunOptions& opts);

}  // namespace attrition

#endif
