#ifndef ATTRITION_DESIGNER_HPP
#define ATTRITION_DESIGNER_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "attrition/grid.hpp"
#include "attrition/rational.hpp"
#include "attrition/thresholds.hpp"

namespace attrition {

/**
 * Outcome-contingent payments for reports on a belief grid. An agent who
 * reports "high" at interior point k is paid reward_h[k] if the public
 * belief later exits through the top and is fined punishment if it exits
 * through the bottom; a "low" report mirrors this. A halted walk pays zero.
 * Rewards are sized so a fabricated report has zero expected value to an
 * agent holding the public belief:
 *   reward_h[k] = punishment * (1 - u) / u,  u = pi_mixed(q^k, q^{k+1}),
 *   reward_l[k] = punishment * v / (1 - v),  v = pi_mixed(q^k, q^{k-1}),
 * with reward_l[1] = 0 and reward_h[n] = 0 at the edges (the boundary is
 * reached immediately, so the losing branch is certain and no reward is
 * needed). Indices 1..n; slot 0 is unused padding.
 */
struct CompensationScheme {
    BeliefGrid grid;
    ExitProbabilities ep;  ///< the exit solve the rewards were computed from
    Rat punishment;        ///< Q >= 0
    std::vector<Rat> reward_h, reward_l;
};

CompensationScheme design_scheme(const BeliefGrid& grid, const ExitProbabilities& ep, const Rat& Q);

/// Expected value of sending message m at interior point k while privately
/// believing the state is H with probability p. Empty-handed agents may also
/// stay silent for a flat zero, which is not covered here.
enum class Report { High, Low };
Rat report_value(const CompensationScheme& scheme, std::size_t k, Report m, const Rat& p);

/**
 * Two conventions for the expected gross payoff of working truthfully at
 * interior point k (discovery certain for this accounting; scaling by the
 * discovery and continuation probabilities happens in minimal_q/verify_ic):
 *  - ConsistentIndex: both the reward and the punishment branch are weighted
 *    by exit probabilities of the walk that starts at the post-report public
 *    point with the reporter's posterior, i.e. report_value at the posterior;
 *  - ReportAnchoredPunish: the punishment weight of an upward report uses the
 *    top-exit probability anchored at the pre-report point pi_mixed(q^k,
 *    q^{k+1}) instead. This reproduces a common back-of-envelope accounting
 *    and generally differs from the consistent form off the knife edge.
 */
enum class WorkPayoffForm { ConsistentIndex, ReportAnchoredPunish };

Rat work_payoff(const CompensationScheme& scheme, std::size_t k,
                WorkPayoffForm form = WorkPayoffForm::ConsistentIndex);

/// Best expected value achievable at interior k by an agent with no private
/// information who fabricates a report (silence excluded). Zero by design.
Rat shirk_payoff(const CompensationScheme& scheme, std::size_t k);

/// Reward/punishment feasibility box.
struct PayoffBox {
    Rat R;  ///< rewards must not exceed R
    Rat P;  ///< the punishment must not exceed P
};

struct MinimalQ {
    Rat q_star;              ///< smallest punishment making work weakly optimal everywhere
    std::size_t binding_k;   ///< interior index where the constraint binds
    std::vector<Rat> unit_margin;  ///< per-unit-punishment work margin at each interior k (slot 0 unused)
    bool feasible = true;
    std::optional<std::string> violation;
};

/**
 * Smallest punishment scale sustaining truthful work at every interior
 * point. The work incentive at point k scales linearly in Q with zero
 * intercept; with continuation probability rho per round the effective
 * walk halts at rate kappa = lambda*rho, and the agent's effort is
 * rewarded only when a discovery arrives and the walk later exits, so
 *   Q* = max_k c / (lambda * exit_k * unit_margin[k]),
 * where exit_k is the total exit probability of the kappa-walk from q^k
 * (identically one when rho = 1) and unit_margin is computed on the plain
 * walk. Requires every unit margin positive; reports the provided box when
 * the resulting rewards or Q* fall outside it.
 */
MinimalQ minimal_q(const BeliefGrid& grid, const ExitProbabilities& ep, const Rat& c,
                   const Rat& lambda, const Rat& rho,
                   const std::optional<PayoffBox>& box = std::nullopt);

/// One-round deviation audit of a scheme.
struct DeviationMargin {
    std::size_t k;          ///< interior point audited
    std::string deviation;  ///< e.g. "shirk-report-high", "work-always-low"
    Rat value;              ///< expected net payoff of the deviation
    Rat margin;             ///< truthful-work payoff minus the deviation value
};

struct IcReport {
    bool incentive_compatible = true;  ///< all margins >= 0
    Rat truthful_net(std::size_t k) const;
    std::vector<Rat> truthful;  ///< net truthful-work payoff per interior k (slot 0 unused)
    std::vector<DeviationMargin> margins;
    std::optional<std::string> box_violation;
};

/**
 * Evaluates every one-round deviation at every interior point: shirking and
 * fabricating either report (or staying silent), and working but misreporting
 * through each deterministic map from the discovered signal to a message.
 * kappa = lambda*rho scales the informative branches; staying silent is worth
 * zero. Margins are against truthful work. box, when given, also checks the
 * payment bounds.
 */
IcReport verify_ic(const CompensationScheme& scheme, const GameParams& params, const Rat& rho,
                   const std::optional<PayoffBox>& box = std::nullopt);

}  // namespace attrition

#endif
