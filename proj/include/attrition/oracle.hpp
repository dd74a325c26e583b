#ifndef ATTRITION_ORACLE_HPP
#define ATTRITION_ORACLE_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "attrition/beliefs.hpp"
#include "attrition/rational.hpp"
#include "attrition/supply.hpp"

namespace attrition {

/// Payoff table of one agent in a finite game: one exact value per complete
/// message tuple, addressed in base message_count with round 1 most
/// significant.
class PayTable {
  public:
    PayTable(std::size_t horizon, std::size_t message_count, std::vector<Rat> values);

    const Rat& value(const std::vector<std::size_t>& messages) const;
    const std::vector<Rat>& flat() const { return values_; }

  private:
    std::size_t horizon_;
    std::size_t message_count_;
    std::vector<Rat> values_;
};

/**
 * A sequential game small enough for exhaustive analysis: horizon agents act
 * once each in order, privately working (cost c, discovery probability
 * lambda while signals remain) or shirking, then publicly sending one of
 * message_count messages. Payoffs depend on the full message tuple only and
 * must lie in [-punish_cap, reward_cap]. The signal supply is a bounded pmf.
 */
struct FiniteGame {
    FiniteGame(std::size_t horizon, std::size_t message_count, SupplySpec supply,
               const Rat& lambda, const Rat& c, const Rat& reward_cap, const Rat& punish_cap,
               std::vector<PayTable> tables);

    std::size_t horizon;
    std::size_t message_count;
    SupplySpec supply;
    Rat lambda;
    Rat c;
    Rat reward_cap;
    Rat punish_cap;
    std::vector<PayTable> tables;
};

/// Behavior profile: a RoundStrategy for every agent at every message
/// history. Agents are 0-based; agent i has message_count^i histories.
class OracleProfile {
  public:
    OracleProfile(std::size_t horizon, std::size_t message_count);

    std::size_t horizon() const { return strategies_.size(); }
    std::size_t message_count() const { return message_count_; }

    RoundStrategy& at(std::size_t agent, const std::vector<std::size_t>& history);
    const RoundStrategy& at(std::size_t agent, const std::vector<std::size_t>& history) const;

    bool operator==(const OracleProfile& other) const;

    /// True when every round is deterministic: gamma 0 or 1 and the report
    /// distributions that can actually fire are point masses.
    bool pure() const;

    /// Some round works with positive probability (history reached or not).
    bool anywhere_working() const;

  private:
    std::size_t code(std::size_t agent, const std::vector<std::size_t>& history) const;

    std::size_t message_count_;
    std::vector<std::vector<RoundStrategy>> strategies_;
};

/// Exact expected payoff (table value minus own effort cost) of one agent.
Rat expected_payoff(const FiniteGame& game, const OracleProfile& profile, std::size_t agent);

/**
 * Backward-induction audit: at every history, the best shirk message is
 * compared with the best working strategy when all later agents shirk
 * (reporting uniformly). Payoffs never depend on discoveries directly, so
 * working buys nothing and the margin equals c at every history; the scan
 * certifies unraveling when every margin is strictly positive.
 */
struct DominanceReport {
    bool certified = false;
    Rat min_margin;
    std::vector<Rat> agent_margin;  ///< min margin per agent
};

DominanceReport dominance_scan(const FiniteGame& game);

/// Belief over the remaining signal count carried to an unreached history.
/// PointMass{0} is the deviator-worst member of the family.
struct OffPath {
    enum class Kind { PriorCarryForward, PointMass };
    Kind kind = Kind::PriorCarryForward;
    std::size_t atom = 0;

    std::string describe() const;
};

/// The conventions tried, in order: the prior supply pmf carried forward,
/// then a point mass on each count the prior supports (0 first).
std::vector<OffPath> off_path_family(const FiniteGame& game);

/// Largest one-shot improvement tolerated in a certified mixed profile.
/// Pure profiles must be exactly optimal.
inline const Rat kMixedTolerance = Rat(1) / Rat(1000000000000L);

struct EquilibriumCheck {
    bool is_equilibrium = false;
    Rat worst_gap;                     ///< over agents and histories (best supporting belief)
    bool informative = false;          ///< some reached history works with positive probability
    std::optional<OffPath> supporting; ///< off-path convention that worked (when any history is unreached)
    std::vector<std::string> failures; ///< one line per violated history
};

/// One-shot deviation audit at every history (weak sequential rationality).
/// Off-path histories are evaluated under each family member until one
/// supports the profile.
EquilibriumCheck check_equilibrium(const FiniteGame& game, const OracleProfile& profile,
                                   const Rat& tolerance);

struct EquilibriumCertificate {
    OracleProfile profile;
    Rat gap;
    bool informative = false;
    std::optional<OffPath> supporting;
};

struct EnumerationResult {
    std::vector<EquilibriumCertificate> certificates;
    bool any_informative = false;
    std::size_t profiles_checked = 0;
};

/**
 * Exhaustive scan of profiles whose round strategies live on the probability
 * grid {0, step, 2*step, ..., 1} (step = 1/q, q <= 8; horizon <= 3,
 * message_count <= 3). Candidates working with probability gamma are
 * pre-filtered when gamma * c exceeds the mixed tolerance: replacing such a
 * round by its best shirk message raises the payoff by at least gamma * c,
 * so the check below would reject the profile anyway. Pure certificates
 * require exact optimality, mixed ones gap <= kMixedTolerance. Throws when
 * the surviving profile count exceeds the enumeration cap.
 */
EnumerationResult enumerate_equilibria(const FiniteGame& game, const Rat& step);

inline constexpr std::size_t kEnumerationCap = 500000;

/**
 * Structural bounds audited along every reached history, exact in rationals:
 *  - supermartingale: for every k, the expected next-round survival
 *    E_m[F'(k)] equals F(k)(1 - gamma*lambda) + gamma*lambda*F(k+1) and never
 *    exceeds F(k);
 *  - empty-find value: for every message m, the continuation value after
 *    working and finding nothing satisfies
 *    V_work(m) <= max_m' V_shirk(m') + f0 * W / (1 - lambda),
 *    W = reward_cap + punish_cap (skipped at lambda = 1);
 *  - discovery rate: whenever F(k) > C * F(k+1) with C the payoff/cost ratio
 *    constant 2W/(c*lambda*(1-lambda)) (2W/c at lambda = 1), the working
 *    rate beta = gamma*lambda*F(1) obeys
 *    beta * (F(k) - C*F(k+1)) <= C * E_m[(F(k) - F'(k)) * 1{m informative}],
 *    a message being informative when some later reached round works.
 *    Meaningful for equilibrium profiles; skipped when c = 0.
 */
struct HistoryBounds {
    std::size_t agent = 0;
    std::vector<std::size_t> history;
    Rat reach;
    bool supermartingale_ok = true;
    Rat supermartingale_slack;  ///< min over k of F(k) - E[F'(k)]
    bool empty_value_ok = true;
    std::optional<Rat> empty_value_slack;  ///< min over messages, when applicable
    bool discovery_ok = true;
    std::optional<Rat> discovery_slack;  ///< min over applicable k
};

struct BoundReport {
    bool all_hold = true;
    std::vector<HistoryBounds> entries;
};

BoundReport bound_checks(const FiniteGame& game, const OracleProfile& profile);

}  // namespace attrition

#endif
