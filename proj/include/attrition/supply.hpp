#ifndef ATTRITION_SUPPLY_HPP
#define ATTRITION_SUPPLY_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "attrition/rational.hpp"
#include "attrition/rng.hpp"

namespace attrition {

/// Binary state of the world; signal values share the alphabet.
enum class State { H, L };

inline State flip(State s) { return s == State::H ? State::L : State::H; }

/**
 * Distribution of the number of discoverable signals.
 *
 * Three representations:
 *  - pmf: explicit weights over counts {0..Kmax}, exact rationals summing to 1;
 *  - geometric(f1, rho): Pr(count >= k) = rho^(k-1) * f1 for k >= 1, rho in (0,1];
 *  - unlimited: Pr(count >= k) = 1 for all k, never materialized.
 */
class SupplySpec {
  public:
    enum class Kind { Pmf, Geometric, Unlimited };

    static SupplySpec pmf(std::vector<Rat> weights);
    static SupplySpec geometric(const Rat& f1, const Rat& rho);
    static SupplySpec unlimited();

    Kind kind() const { return kind_; }
    bool bounded() const { return kind_ == Kind::Pmf; }

    /// Pr(count >= k) for k >= 1; k = 0 is rejected.
    Rat survival(std::size_t k) const;

    /// Pr(count == k). Rejected for the unlimited kind and for geometric
    /// specs with rho = 1 (which place an atom at infinity when f1 > 0).
    Rat mass(std::size_t k) const;

    /// Largest representable count (pmf kind only).
    std::size_t kmax() const;

    const std::vector<Rat>& weights() const;  // pmf kind only
    const Rat& f1() const;                    // geometric kind only
    const Rat& rho() const;                   // geometric kind only

  private:
    SupplySpec() = default;

    Kind kind_ = Kind::Unlimited;
    std::vector<Rat> weights_;
    Rat f1_, rho_;
};

/// Common prior over the state plus the signal precision.
struct SignalModel {
    SignalModel(const Rat& p0, const Rat& pi);
    Rat p0;  ///< prior probability of state H, in [0,1]
    Rat pi;  ///< Pr(signal = state), strictly between 1/2 and 1
};

struct IhrReport {
    bool holds = true;
    /// Smallest count at which the hazard Pr(count = k)/Pr(count >= k) falls
    /// (weak mode) or fails to rise (strict mode) relative to k-1.
    std::optional<std::size_t> first_violation;
};

/// Checks that the hazard rate of the count distribution is nondecreasing
/// (or strictly increasing when strict = true). The unlimited kind holds
/// vacuously: its hazard is identically zero.
IhrReport check_ihr(const SupplySpec& spec, bool strict = false);

/**
 * One realized state plus its signal sequence. Signals materialize lazily so
 * unbounded supplies are usable; draws are consumed in a fixed order, hence
 * equal streams produce equal sequences.
 */
class SignalSequence {
  public:
    SignalSequence(const SupplySpec& spec, const SignalModel& model, Stream stream);

    State omega() const { return omega_; }

    /// Whether at least k signals exist (1-based); extends the sequence.
    bool has_signal(std::size_t k);

    /// Value of the k-th signal; requires has_signal(k).
    State signal(std::size_t k);

    /// Exact realized count. Forces full materialization for almost-surely
    /// finite laws; nullopt when the realized supply is infinite.
    std::optional<std::size_t> count();

  private:
    void extend(std::size_t k);
    State draw_signal();

    SupplySpec spec_;
    Rat pi_;
    Stream stream_;
    State omega_;
    std::vector<State> signals_;
    std::optional<std::size_t> known_count_;  // set once the count is decided
    bool infinite_ = false;
};

/// Draws state, count and signals for one episode.
SignalSequence sample_sequence(const SupplySpec& spec, const SignalModel& model, Stream stream);

}  // namespace attrition

#endif
