#ifndef ATTRITION_BELIEFS_HPP
#define ATTRITION_BELIEFS_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "attrition/rational.hpp"
#include "attrition/supply.hpp"

namespace attrition {

/**
 * Belief about the remaining signal supply: a vector of tail probabilities
 * f(k) = Pr(at least k signals remain), k >= 1, nonincreasing in k.
 *
 * Entries beyond the stored prefix follow the tail rule: either zero (bounded
 * support) or a geometric extension f(stored) * rho^(k - stored). Carrying the
 * ratio symbolically keeps geometric beliefs exact at every depth.
 */
class SurvivalBelief {
  public:
    /// Prior belief matching a supply law.
    static SurvivalBelief from_supply(const SupplySpec& spec);

    /// Belief with f(k) = 0 beyond the stored entries.
    static SurvivalBelief truncated(std::vector<Rat> f);

    /// Belief whose tail extends geometrically with the given ratio.
    static SurvivalBelief with_tail(std::vector<Rat> f, const Rat& tail_rho);

    Rat f(std::size_t k) const;
    Rat f0() const { return 1 - f(1); }

    std::size_t stored() const { return f_.size(); }
    const std::optional<Rat>& tail_rho() const { return tail_rho_; }

    bool operator==(const SurvivalBelief& other) const;

  private:
    SurvivalBelief(std::vector<Rat> f, std::optional<Rat> tail_rho);

    std::vector<Rat> f_;
    std::optional<Rat> tail_rho_;
};

/// Posterior probability that the state is H.
struct StateBelief {
    explicit StateBelief(const Rat& p_) : p(p_) { require_probability(p, "state belief"); }
    Rat p;
};

/**
 * One round of behavior: work with probability gamma, then report. Reports are
 * distributions over message ids 0..m-1, one for each branch the agent can be
 * in: shirked, worked and found a signal, worked and found nothing.
 */
struct RoundStrategy {
    RoundStrategy(const Rat& gamma, std::vector<Rat> shirk_report, std::vector<Rat> found_report,
                  std::vector<Rat> empty_report);

    std::size_t message_count() const { return shirk_report.size(); }

    Rat gamma;
    std::vector<Rat> shirk_report;
    std::vector<Rat> found_report;
    std::vector<Rat> empty_report;
};

/**
 * Posterior over the remaining supply after observing one message.
 *
 * Every term is an unconditional joint probability of (branch, message):
 *   shirk:            (1 - gamma) * shirk_report(m), supply untouched;
 *   work, no find:    gamma * ((1 - f(1)) + f(1)(1 - lambda)) * empty_report(m),
 *                     supply untouched;
 *   work, find:       gamma * lambda * f(1) * found_report(m), one signal
 *                     consumed, so "k remain" needs f(k+1) beforehand.
 * The posterior divides the matching tail masses by the total message
 * probability. Returns nullopt when the message has probability zero (the
 * caller owns the off-path belief). Exact in rationals; the tail rule is
 * preserved.
 */
std::optional<SurvivalBelief> update_survival(const SurvivalBelief& belief,
                                              const RoundStrategy& strat, std::size_t message,
                                              const Rat& lambda);

/// Bayes update of the state posterior from one signal of precision pi:
/// posterior odds are prior odds times pi/(1-pi) for H, (1-pi)/pi for L.
StateBelief update_state_belief(const StateBelief& prior, State observed, const Rat& pi);

/// Posterior after nH high and nL low signals; only the net count matters.
StateBelief posterior_after_counts(const StateBelief& prior, std::size_t n_h, std::size_t n_l,
                                   const Rat& pi);

}  // namespace attrition

#endif
