#ifndef ATTRITION_THRESHOLDS_HPP
#define ATTRITION_THRESHOLDS_HPP

#include <cstddef>
#include <optional>
#include <string>

#include "attrition/rational.hpp"
#include "attrition/supply.hpp"

namespace attrition {

/// Primitive payoff parameters. The punishment cap P enters only feasibility
/// checks (designed punishments must fit in [-P, R]); no closed-form constant
/// depends on it.
struct GameParams {
    GameParams(const Rat& R, const Rat& P, const Rat& c, const Rat& lambda);
    Rat R;       ///< maximal gross reward, R > c
    Rat P;       ///< maximal punishment magnitude, P >= 0
    Rat c;       ///< effort cost, c > 0
    Rat lambda;  ///< discovery probability in (0,1]
};

/**
 * The constants of the suboptimality bound, all exact rationals:
 *   C    = 2R/c at lambda = 1, else 2R/(c*lambda*(1-lambda));
 *   g    = R/(lambda*c);
 *   B    = 8*C*g;
 *   sqrt_G = 128*R^3/c^3 at lambda = 1, else 128*R^3/(c^3*lambda^2*(1-lambda));
 *   G    = sqrt_G^2, eta = 1/sqrt_G.
 *
 * Working is strictly suboptimal when c/R exceeds
 *   term1 + term2 + term3 + term4
 *     = 1/(2*eta*G^2) + 3/sqrt_G + 2*B*eta + B/sqrt_G.
 * The struct records each term, the per-term comparison against c/(4R), and
 * the comparison of the sum against c/R. term3 equals c/(4R) exactly (the
 * constant 128 is chosen to attain it), so each_term_strictly_below_quarter
 * can never be true; term1, term2 and term4 are strictly below.
 */
struct ProofConstants {
    Rat C, g, B;
    Rat sqrt_G, G, eta;
    Rat term1, term2, term3, term4;
    Rat quarter_bound;  ///< c/(4R)
    Rat term_sum;
    bool each_term_strictly_below_quarter;
    bool sum_strictly_below_work_floor;  ///< term_sum < c/R
};

/// Minimal probability that a signal remains at which working can possibly
/// pay: an agent works only if f(1) >= c/R.
Rat work_floor(const GameParams& params);

/// The ratio constant C described above.
Rat c_lambda(const GameParams& params);

ProofConstants proof_constants(const GameParams& params);

/**
 * The unique F in (0,1) solving 2F/(1-F)^2 = 1/(m_count^2 * fbar * R).
 * Below this value the informative-behavior coefficient of the witness
 * analysis contracts to zero. Bisection on (0,1); the returned rational has
 * residual |2F/(1-F)^2 - target| < 1e-14.
 */
Rat witness_threshold(std::size_t m_count, const Rat& fbar, const Rat& R);

/**
 * Non-existence certificate for informative play under a supply law.
 *  - impossible-bounded-support: the support of the count is bounded, so the
 *    survival chain hits zero;
 *  - impossible-work-floor: f(1) < c/R, nobody ever works;
 *  - diagnostic: some survival ratios exceed C (attrition faster than the
 *    bound machinery tolerates), reported but not decisive by itself;
 *  - inconclusive: no obstruction found (e.g. unlimited supply).
 */
struct AttritionCertificate {
    enum class Kind { ImpossibleBoundedSupport, ImpossibleWorkFloor, Diagnostic, Inconclusive };
    Kind kind;
    std::optional<std::size_t> zero_tail_at;         ///< bounded case: first k with survival 0
    std::optional<Rat> f1;                           ///< work-floor case: the supply's f(1)
    std::optional<Rat> floor;                        ///< work-floor case: c/R
    bool ratio_gap_all_k = false;                    ///< diagnostic: survival(k) > C*survival(k+1) at every k
    std::optional<std::size_t> ratio_gap_largest_k;  ///< diagnostic: largest such k within the probe
    std::string label() const;                       ///< machine-readable kind name
};

/// Probe depth for the diagnostic scan over survival ratios.
inline constexpr std::size_t kCertificateProbeDepth = 64;

AttritionCertificate attrition_certificate(const SupplySpec& spec, const GameParams& params);

}  // namespace attrition

#endif
