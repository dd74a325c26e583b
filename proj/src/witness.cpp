#include "attrition/witness.hpp"

#include <algorithm>
#include <stdexcept>

namespace attrition {

namespace {

// Exact uniform tick in [0,1): a 64-bit draw over 2^64.
Rat unit_rat(Stream& stream) {
    static const mpz_class denom = mpz_class(1) << 64;
    Rat r(mpz_class(static_cast<unsigned long>(stream.next_u64())), denom);
    r.canonicalize();
    return r;
}

}  // namespace

ShockDensity ShockDensity::uniform(const Rat& width) {
    if (width <= 0) throw std::invalid_argument("ShockDensity: width must be positive");
    ShockDensity d;
    d.kind_ = Kind::Uniform;
    d.knots_ = {Rat(0), width};
    d.values_ = {1 / width, 1 / width};
    return d;
}

ShockDensity ShockDensity::piecewise_linear(std::vector<Rat> knots, std::vector<Rat> values) {
    if (knots.size() < 2 || knots.size() != values.size())
        throw std::invalid_argument("ShockDensity: need matching knots and values, at least two");
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        if (knots[i] >= knots[i + 1])
            throw std::invalid_argument("ShockDensity: knots must increase strictly");
    }
    Rat integral = 0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        if (values[i] < 0 || values[i + 1] < 0)
            throw std::invalid_argument("ShockDensity: density values must be nonnegative");
        integral += (knots[i + 1] - knots[i]) * (values[i] + values[i + 1]) / 2;
    }
    if (integral != 1)
        throw std::invalid_argument("ShockDensity: trapezoid integral must equal one, got " +
                                    to_string(integral));
    ShockDensity d;
    d.kind_ = Kind::PiecewiseLinear;
    d.knots_ = std::move(knots);
    d.values_ = std::move(values);
    return d;
}

ShockDensity ShockDensity::triangular(const Rat& width) {
    if (width <= 0) throw std::invalid_argument("ShockDensity: width must be positive");
    return piecewise_linear({Rat(0), width / 2, width}, {Rat(0), 2 / width, Rat(0)});
}

Rat ShockDensity::fbar() const { return *std::max_element(values_.begin(), values_.end()); }

Rat ShockDensity::density(const Rat& x) const {
    if (x < lo() || x > hi()) return 0;
    for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
        if (x <= knots_[i + 1]) {
            const Rat t = (x - knots_[i]) / (knots_[i + 1] - knots_[i]);
            return values_[i] + t * (values_[i + 1] - values_[i]);
        }
    }
    return values_.back();
}

Rat ShockDensity::sample(Stream& stream) const {
    if (kind_ == Kind::Uniform) return lo() + (hi() - lo()) * unit_rat(stream);
    const Rat bound = fbar();
    // Rejection against the flat envelope; acceptance probability is the
    // inverse of bound * support width, at least 1/2 for any unimodal shape
    // normalized to one, so the loop is short with overwhelming probability.
    for (int attempt = 0; attempt < 100000; ++attempt) {
        const Rat x = lo() + (hi() - lo()) * unit_rat(stream);
        const Rat y = bound * unit_rat(stream);
        if (y < density(x)) return x;
    }
    throw std::runtime_error("ShockDensity: rejection sampling failed to terminate");
}

WitnessSpec::WitnessSpec(std::vector<ShockDensity> densities_,
                         std::vector<std::vector<Rat>> informative_value_,
                         std::vector<Rat> baseline_value_, const Rat& R_, const Rat& phi_)
    : densities(std::move(densities_)),
      informative_value(std::move(informative_value_)),
      baseline_value(std::move(baseline_value_)),
      R(R_),
      phi(phi_) {
    const std::size_t m = densities.size();
    if (m < 2) throw std::invalid_argument("WitnessSpec: need at least two messages");
    if (informative_value.size() != m || baseline_value.size() != m)
        throw std::invalid_argument("WitnessSpec: need one value row per message");
    if (R <= 0) throw std::invalid_argument("WitnessSpec: R must be positive");
    if (phi < 0 || phi > 1) throw std::invalid_argument("WitnessSpec: phi must be a probability");
    for (std::size_t i = 0; i < m; ++i) {
        if (informative_value[i].size() != 2)
            throw std::invalid_argument("WitnessSpec: one informative value per binary signal");
        for (const Rat& v : informative_value[i])
            if (v < 0 || v > R)
                throw std::invalid_argument("WitnessSpec: informative values must lie in [0,R]");
        if (baseline_value[i] < 0 || baseline_value[i] > R)
            throw std::invalid_argument("WitnessSpec: baseline values must lie in [0,R]");
    }
}

Rat WitnessSpec::fbar() const {
    Rat best = densities.front().fbar();
    for (const ShockDensity& d : densities) best = std::max(best, d.fbar());
    return best;
}

Rat hat_survival(const SupplySpec& spec, std::size_t consumed, std::size_t k) {
    if (k == 0) return Rat(1);
    if (consumed == 0) return spec.survival(k);
    const Rat base = spec.survival(consumed);
    if (base == 0)
        throw std::invalid_argument("hat_survival: conditioning on an impossible count");
    return spec.survival(consumed + k) / base;
}

HatSurvival hat_survival_table(const SupplySpec& spec, std::size_t consumed, std::size_t depth) {
    HatSurvival out;
    out.consumed = consumed;
    out.values.reserve(depth);
    for (std::size_t k = 1; k <= depth; ++k) out.values.push_back(hat_survival(spec, consumed, k));
    return out;
}

HatMonotonicityReport ihr_monotonicity_check(const SupplySpec& spec, std::size_t probe) {
    HatMonotonicityReport report;
    if (probe == 0) return report;

    std::size_t qmax = probe;
    if (spec.bounded()) qmax = std::min(qmax, spec.kmax());
    while (qmax > 0 && spec.survival(qmax) == 0) --qmax;

    auto record = [&](std::size_t q, std::size_t k) {
        if (!report.first_violation) report.first_violation = {q, k};
    };

    for (std::size_t q = 0; q < qmax; ++q) {
        for (std::size_t k = 1; k <= probe; ++k) {
            if (hat_survival(spec, q + 1, k) > hat_survival(spec, q, k)) {
                report.monotone_in_discoveries = false;
                record(q, k);
            }
        }
    }

    // Mixture variant: an observer unsure how many signals were consumed,
    // holding weights over r >= q, must never be more optimistic than the
    // floor count q allows.
    for (std::size_t q = 0; q < qmax; ++q) {
        std::vector<Rat> uniform(qmax - q + 1, Rat(1) / Rat(static_cast<long>(qmax - q + 1)));
        std::vector<Rat> geometric;
        {
            Rat w = 1, total = 0;
            for (std::size_t r = q; r <= qmax; ++r, w /= 2) {
                geometric.push_back(w);
                total += w;
            }
            for (Rat& x : geometric) x /= total;
        }
        for (const auto& weights : {uniform, geometric}) {
            for (std::size_t k = 1; k <= probe; ++k) {
                Rat mixed = 0;
                for (std::size_t i = 0; i < weights.size(); ++i)
                    mixed += weights[i] * hat_survival(spec, q + i, k);
                if (mixed > hat_survival(spec, q, k)) {
                    report.mixture_bound_holds = false;
                    record(q, k);
                }
            }
        }
    }
    return report;
}

Rat order_stat_bound(std::size_t L, const Rat& fbar, const Rat& eps) {
    if (L < 2) throw std::invalid_argument("order_stat_bound: need at least two draws");
    if (fbar <= 0) throw std::invalid_argument("order_stat_bound: density bound must be positive");
    if (eps < 0) throw std::invalid_argument("order_stat_bound: eps must be nonnegative");
    return Rat(static_cast<long>(L)) * Rat(static_cast<long>(L - 1)) * fbar * eps;
}

Rat contraction_coefficient(const Rat& F, std::size_t m_count, const Rat& fbar, const Rat& R) {
    if (F < 0 || F >= 1)
        throw std::invalid_argument("contraction_coefficient: F must lie in [0,1)");
    if (m_count < 2) throw std::invalid_argument("contraction_coefficient: need two messages");
    const Rat omf = 1 - F;
    return 2 * Rat(static_cast<long>(m_count * m_count)) * fbar * R * F / (omf * omf);
}

Rat informative_event_bound(const WitnessSpec& spec, const std::vector<Rat>& z) {
    if (z.size() != spec.message_count())
        throw std::invalid_argument("informative_event_bound: one z entry per message");
    const Rat fb = spec.fbar();
    Rat total = 0;
    for (std::size_t a = 0; a < z.size(); ++a)
        for (std::size_t b = a + 1; b < z.size(); ++b)
            total += 2 * fb * spec.R * (z[a] + z[b]);
    return total;
}

WitnessRoundResult witness_round(const WitnessSpec& spec, const SurvivalBelief& belief,
                                 const std::vector<Rat>& z, State signal, Stream& stream) {
    if (belief.f(1) <= 0)
        throw std::invalid_argument(
            "witness_round: no signal can remain; the arrival rule must set phi = 0 here");
    if (z.size() != spec.message_count())
        throw std::invalid_argument("witness_round: one z entry per message");
    for (const Rat& zi : z) require_probability(zi, "witness_round z");

    WitnessRoundResult out;
    out.shocks.reserve(spec.message_count());
    for (const ShockDensity& d : spec.densities) out.shocks.push_back(d.sample(stream));

    // The explicit return type matters: letting the compiler deduce it would
    // hand back a GMP expression template referencing dead temporaries.
    auto utility = [&](std::size_t m, std::size_t s) -> Rat {
        return z[m] * spec.informative_value[m][s] + (1 - z[m]) * spec.baseline_value[m] +
               out.shocks[m];
    };
    auto best = [&](std::size_t s) {
        std::size_t arg = 0;
        Rat val = utility(0, s);
        for (std::size_t m = 1; m < spec.message_count(); ++m) {
            const Rat u = utility(m, s);
            if (u > val) {
                val = u;
                arg = m;
            }
        }
        return arg;
    };
    out.best_on_high = best(0);
    out.best_on_low = best(1);
    out.informative = out.best_on_high != out.best_on_low;
    out.message = signal == State::H ? out.best_on_high : out.best_on_low;
    return out;
}

}  // namespace attrition
