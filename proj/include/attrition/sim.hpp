#ifndef ATTRITION_SIM_HPP
#define ATTRITION_SIM_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "attrition/beliefs.hpp"
#include "attrition/designer.hpp"
#include "attrition/grid.hpp"
#include "attrition/rational.hpp"
#include "attrition/rng.hpp"
#include "attrition/supply.hpp"
#include "attrition/thresholds.hpp"

namespace attrition {

enum class SimMessage { High, Low, Silent };

/**
 * Baseline behavior for a whole episode.
 *  - Designed: every agent works while the public point is interior, reports
 *    a discovered signal truthfully and stays silent otherwise.
 *  - AllShirk: nobody works; everyone sends the same fixed message. With the
 *    default Silent message both the public point and the survival belief
 *    stay constant.
 */
struct SimProfile {
    enum class Kind { Designed, AllShirk };
    Kind kind = Kind::Designed;
    SimMessage shirk_message = SimMessage::Silent;

    static SimProfile designed() { return {}; }
    static SimProfile all_shirk(SimMessage m = SimMessage::Silent) {
        return {Kind::AllShirk, m};
    }
};

/// A single-round departure from the designed behavior.
struct Deviation {
    enum class Kind { Shirk, WorkMap };
    Kind kind = Kind::Shirk;
    SimMessage shirk_message = SimMessage::Silent;  // what a shirker sends
    SimMessage on_high = SimMessage::High;          // what a worker sends per discovered signal
    SimMessage on_low = SimMessage::Low;

    static Deviation shirk(SimMessage m) {
        Deviation d;
        d.kind = Kind::Shirk;
        d.shirk_message = m;
        return d;
    }
    static Deviation work_map(SimMessage on_h, SimMessage on_l) {
        Deviation d;
        d.kind = Kind::WorkMap;
        d.on_high = on_h;
        d.on_low = on_l;
        return d;
    }
};

struct TranscriptRow {
    std::size_t round = 0;        ///< 1-based
    std::size_t point_index = 0;  ///< grid index at decision time
    Rat p;                        ///< grid point value (scheme decoder state)
    Rat f1;                       ///< survival belief Pr(>= 1 signal remains) before the round
    bool worked = false;
    std::optional<State> discovery;
    SimMessage message = SimMessage::Silent;
    Rat payment;  ///< settled once the terminal outcome is known
};

enum class Terminal { ExitTop, ExitBottom, Stopped, Truncated };

struct Transcript {
    std::vector<TranscriptRow> rows;
    Terminal terminal = Terminal::Truncated;
    State omega = State::H;
    std::optional<std::size_t> deviation_round;

    Rat total_payments() const;
    Rat total_net(const Rat& effort_cost) const;  ///< payments minus cost of worked rounds
};

struct SimConfig {
    GameParams params;
    SupplySpec supply;
    SignalModel model;
    CompensationScheme scheme;
    SimProfile profile = SimProfile::designed();
    std::size_t horizon_cap = 10000;
};

/**
 * Plays one episode.
 *
 * Round mechanics: the acting agent at interior point k behaves per the
 * profile; a worker discovers the next unconsumed signal with probability
 * lambda while one remains. Messages drive the public point one step (High
 * up, Low down). A Silent round halts the walk for good, except under supply
 * laws whose tail never decays (unlimited, geometric with rho = 1) where
 * silence is ordinary bad luck and play continues in place. The episode ends
 * at a boundary exit, at a halt, or at the horizon cap (Truncated).
 *
 * The f1 column tracks the survival belief of an observer who knows the
 * profile, updated by exact Bayes; a message that observer assigns zero
 * probability carries the belief forward unchanged.
 *
 * Payments settle when the episode ends: a High report earns
 * reward_h[k] on a top exit and -punishment on a bottom exit; Low mirrors
 * this; halted or truncated walks and Silent rounds pay zero.
 */
Transcript run_episode(const SimConfig& cfg, Stream& stream);

/// Episode with the stream derived from (seed, episode_index).
Transcript run_episode(const SimConfig& cfg, std::uint64_t seed, std::uint64_t episode_index);

struct DeviationOutcome {
    bool reached = false;  ///< the episode was still running at the deviation round
    Transcript transcript;
    Rat deviator_net;  ///< deviator's payment minus effort cost; 0 when !reached
};

/// Designed play except for one agent's single-round deviation. The public
/// decodes messages as if no deviation happened.
DeviationOutcome deviation_episode(const SimConfig& cfg, const Deviation& dev, std::size_t round,
                                   Stream& stream);

struct PointStats {
    std::size_t visits = 0;
    std::size_t worked = 0;
    std::size_t discoveries = 0;
    Rat net_sum;    ///< realized payment minus effort cost, summed over visits
    Rat drift_sum;  ///< sum of (next point value - point value)
};

struct EpisodeStats {
    std::size_t episodes = 0;
    std::size_t exit_top = 0, exit_bottom = 0, stopped = 0, truncated = 0;
    std::size_t total_rounds = 0;
    std::size_t total_discoveries = 0;
    std::size_t omega_high = 0;
    Rat total_net;                      ///< all agents, all episodes
    std::vector<PointStats> per_point;  ///< indexed by grid point, boundaries unused

    Rat exit_top_share() const;
    Rat mean_rounds() const;
    Rat mean_net() const;  ///< per episode
};

/**
 * Runs episodes indexed 0..episodes-1, each on its own substream of the
 * seed, and aggregates. All accumulators are exact rationals merged in index
 * order, so the result is identical for any job count.
 */
EpisodeStats monte_carlo(const SimConfig& cfg, std::size_t episodes, std::uint64_t seed,
                         unsigned jobs = 1);

struct DeviationStats {
    std::size_t episodes = 0;
    std::size_t reached = 0;
    Rat net_sum;        ///< deviator net payoff, summed over reached episodes
    double net_sq_sum = 0;  ///< for the standard error

    Rat mean() const;
    double standard_error() const;
};

/// Monte Carlo over deviation episodes; statistics are conditional on the
/// deviation round being reached.
DeviationStats deviation_monte_carlo(const SimConfig& cfg, const Deviation& dev, std::size_t round,
                                     std::size_t episodes, std::uint64_t seed, unsigned jobs = 1);

}  // namespace attrition

#endif
