#ifndef ATTRITION_CONFIG_HPP
#define ATTRITION_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "attrition/rational.hpp"
#include "attrition/sim.hpp"
#include "attrition/supply.hpp"
#include "attrition/thresholds.hpp"
#include "attrition/witness.hpp"

namespace attrition {

/// Raised for every malformed or inconsistent configuration input. The CLI
/// maps it to exit code 1 and an errors.json entry.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GridSection {
    Rat p_lo, p_hi;
};

struct SchemeSection {
    std::optional<Rat> q;    ///< fixed punishment; nullopt means "auto" (use minimal_q)
    std::optional<Rat> rho;  ///< per-round continuation probability for the incentive audit
};

struct SimSection {
    std::size_t episodes = 1000;
    std::uint64_t seed = 1;
    std::size_t horizon_cap = 10000;
    SimProfile profile = SimProfile::designed();
    std::size_t transcript_episodes = 10;  ///< how many episodes land in transcripts.csv
};

struct OracleSection {
    std::size_t horizon = 2;
    std::size_t messages = 2;
    Rat step = ratio(1, 4);  ///< probability grid step for enumeration
};

struct WitnessSection {
    std::vector<ShockDensity> densities;
    std::vector<std::vector<Rat>> informative_value;
    std::vector<Rat> baseline_value;
    Rat phi;
    std::vector<Rat> z;     ///< informative-continuation probability per message
    Rat epsilon;            ///< proximity scale for the collision bound
    std::size_t witnesses = 2;  ///< draw count L in the collision bound
    std::size_t probe = 12;     ///< depth for conditional-survival tables
};

/**
 * Everything an experiment run needs, parsed and validated up front. params,
 * supply and model are mandatory; the other sections are optional and each
 * subcommand rejects a config lacking the sections it needs. All rational
 * fields accept a string literal ("3", "2/7", "0.125") or an integer JSON
 * number; non-integer JSON numbers are rejected so values stay exact.
 */
struct ExperimentConfig {
    GameParams params;
    SupplySpec supply;
    SignalModel model;
    std::optional<GridSection> grid;
    std::optional<SchemeSection> scheme;
    std::optional<SimSection> sim;
    std::optional<OracleSection> oracle;
    std::optional<WitnessSection> witness;
};

/// Parses and cross-validates a config document. origin names the source in
/// error messages (a file path or "<inline>").
ExperimentConfig parse_config(const std::string& json_text, const std::string& origin);

/// Reads the file and parses it. Throws ConfigError when unreadable.
ExperimentConfig load_config(const std::string& path);

/// The continuation probability the design stage should use: the explicit
/// scheme.rho when the section carries one, otherwise the supply's own decay
/// (geometric tail ratio; 1 for unlimited and explicit-pmf supplies).
Rat effective_rho(const ExperimentConfig& cfg);

}  // namespace attrition

#endif
