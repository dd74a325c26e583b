#ifndef ATTRITION_WITNESS_HPP
#define ATTRITION_WITNESS_HPP

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "attrition/beliefs.hpp"
#include "attrition/rational.hpp"
#include "attrition/rng.hpp"
#include "attrition/supply.hpp"

namespace attrition {

/**
 * Preference-shock distribution with a certified density bound. Two shapes:
 * uniform on [0, width], and piecewise linear between strictly increasing
 * knots (values at knots, trapezoid integral exactly one). fbar() returns
 * the exact supremum of the density.
 *
 * Samples are exact rationals: uniform draws map one 64-bit tick onto the
 * support, piecewise-linear draws use rejection against the flat envelope,
 * so downstream comparisons stay exact.
 */
class ShockDensity {
  public:
    enum class Kind { Uniform, PiecewiseLinear };

    static ShockDensity uniform(const Rat& width);
    static ShockDensity piecewise_linear(std::vector<Rat> knots, std::vector<Rat> values);
    /// Symmetric triangle on [0, width], peak 2/width at the midpoint.
    static ShockDensity triangular(const Rat& width);

    Kind kind() const { return kind_; }
    const Rat& lo() const { return knots_.front(); }
    const Rat& hi() const { return knots_.back(); }
    Rat fbar() const;
    Rat density(const Rat& x) const;
    Rat sample(Stream& stream) const;

  private:
    ShockDensity() = default;
    Kind kind_ = Kind::Uniform;
    std::vector<Rat> knots_;
    std::vector<Rat> values_;  // density at each knot (piecewise kind)
};

/**
 * One witness round: an outsider privately observes a signal s in {H, L},
 * draws an iid preference shock per message, and sends the message
 * maximizing
 *   U(m; s) = z[m] * informative_value[m][s]
 *           + (1 - z[m]) * baseline_value[m] + shock[m],
 * where z[m] is the probability that somebody after the witness still sends
 * an informative message following m, informative_value[m][s] is the
 * witness's expected gross value of m when the signal s eventually shapes
 * play, and baseline_value[m] is its value when nothing informative follows
 * (signal-independent by construction). All values lie in [0, R].
 */
struct WitnessSpec {
    WitnessSpec(std::vector<ShockDensity> densities,
                std::vector<std::vector<Rat>> informative_value, std::vector<Rat> baseline_value,
                const Rat& R, const Rat& phi);

    std::size_t message_count() const { return densities.size(); }
    Rat fbar() const;  ///< max density bound over messages

    std::vector<ShockDensity> densities;             // one per message
    std::vector<std::vector<Rat>> informative_value; // [message][signal], signal 0 = H, 1 = L
    std::vector<Rat> baseline_value;                 // [message]
    Rat R;
    Rat phi;  ///< per-round witness arrival probability; a rule must set it to 0 once no signals remain
};

/// Tail probabilities of the remaining supply after `consumed` confirmed
/// discoveries: values[k-1] = Pr(count >= consumed + k | count >= consumed).
struct HatSurvival {
    std::size_t consumed = 0;
    std::vector<Rat> values;
};

/// Pr(count >= consumed + k | count >= consumed); consumed = 0 gives the
/// prior survival. Requires Pr(count >= consumed) > 0.
Rat hat_survival(const SupplySpec& spec, std::size_t consumed, std::size_t k);

HatSurvival hat_survival_table(const SupplySpec& spec, std::size_t consumed, std::size_t depth);

/**
 * Checks the two conditional-survival properties that an increasing hazard
 * rate buys, over a bounded probe window:
 *  - monotone_in_discoveries: hat(q+1, k) <= hat(q, k) for every q, k;
 *  - mixture_bound_holds: for mixtures over confirmed counts r >= q
 *    (uniform and geometric test weights), the mixed survival never exceeds
 *    hat(q, k).
 */
struct HatMonotonicityReport {
    bool monotone_in_discoveries = true;
    bool mixture_bound_holds = true;
    std::optional<std::pair<std::size_t, std::size_t>> first_violation;  // (q, k)
};

HatMonotonicityReport ihr_monotonicity_check(const SupplySpec& spec, std::size_t probe = 12);

/// Upper bound on the probability that some two of L independent draws with
/// densities bounded by fbar land within eps of each other: L(L-1)*fbar*eps.
Rat order_stat_bound(std::size_t L, const Rat& fbar, const Rat& eps);

/// The factor multiplying the informative-witness probability in the
/// fixed-point bound: 2 * m^2 * fbar * R * F / (1-F)^2. Below one it
/// contracts, forcing that probability to zero.
Rat contraction_coefficient(const Rat& F, std::size_t m_count, const Rat& fbar, const Rat& R);

/// Union bound on the probability that the shock vector makes some message
/// pair closer than their informative stakes: sum over pairs m < m' of
/// 2 * fbar * R * (z[m] + z[m']).
Rat informative_event_bound(const WitnessSpec& spec, const std::vector<Rat>& z);

struct WitnessRoundResult {
    std::vector<Rat> shocks;
    std::size_t best_on_high = 0;  ///< best message if the signal were H
    std::size_t best_on_low = 0;   ///< best message if the signal were L
    std::size_t message = 0;       ///< best message for the realized signal
    bool informative = false;      ///< the two hypothetical best responses differ
};

/// Plays one witness round. Requires a supply that can still matter
/// (belief.f(1) > 0; an arrival rule must have set phi = 0 otherwise) and a
/// z entry in [0,1] per message. Ties break toward the lowest message id.
WitnessRoundResult witness_round(const WitnessSpec& spec, const SurvivalBelief& belief,
                                 const std::vector<Rat>& z, State signal, Stream& stream);

}  // namespace attrition

#endif
