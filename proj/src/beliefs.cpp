#include "attrition/beliefs.hpp"

#include <stdexcept>
#include <utility>

namespace attrition {

namespace {

void require_distribution(const std::vector<Rat>& dist, const char* what) {
    if (dist.empty()) throw std::invalid_argument(std::string(what) + ": empty distribution");
    Rat total = 0;
    for (const Rat& w : dist) {
        if (w < 0) throw std::invalid_argument(std::string(what) + ": negative weight");
        total += w;
    }
    if (total != 1)
        throw std::invalid_argument(std::string(what) + ": weights sum to " + to_string(total));
}

}  // namespace

SurvivalBelief::SurvivalBelief(std::vector<Rat> f, std::optional<Rat> tail_rho)
    : f_(std::move(f)), tail_rho_(std::move(tail_rho)) {
    if (f_.empty()) throw std::invalid_argument("survival belief: empty vector");
    Rat prev = 1;
    for (const Rat& v : f_) {
        require_probability(v, "survival belief entry");
        if (v > prev) throw std::invalid_argument("survival belief must be nonincreasing");
        prev = v;
    }
    if (tail_rho_ && (*tail_rho_ <= 0 || *tail_rho_ > 1))
        throw std::invalid_argument("survival tail ratio must lie in (0,1]");
}

SurvivalBelief SurvivalBelief::from_supply(const SupplySpec& spec) {
    switch (spec.kind()) {
        case SupplySpec::Kind::Pmf: {
            std::vector<Rat> f;
            for (std::size_t k = 1; k <= spec.kmax() + 1; ++k) f.push_back(spec.survival(k));
            return SurvivalBelief(std::move(f), std::nullopt);
        }
        case SupplySpec::Kind::Geometric:
            return SurvivalBelief({spec.f1()}, spec.rho());
        case SupplySpec::Kind::Unlimited:
            return SurvivalBelief({Rat(1)}, Rat(1));
    }
    throw std::logic_error("unreachable");
}

SurvivalBelief SurvivalBelief::truncated(std::vector<Rat> f) {
    return SurvivalBelief(std::move(f), std::nullopt);
}

SurvivalBelief SurvivalBelief::with_tail(std::vector<Rat> f, const Rat& tail_rho) {
    return SurvivalBelief(std::move(f), tail_rho);
}

Rat SurvivalBelief::f(std::size_t k) const {
    if (k == 0) throw std::invalid_argument("survival belief is defined from k = 1");
    if (k <= f_.size()) return f_[k - 1];
    if (!tail_rho_) return 0;
    return f_.back() * rat_pow(*tail_rho_, static_cast<long>(k - f_.size()));
}

bool SurvivalBelief::operator==(const SurvivalBelief& other) const {
    // Compare as functions of k, not by representation.
    const std::size_t depth = std::max(stored(), other.stored()) + 1;
    for (std::size_t k = 1; k <= depth; ++k)
        if (f(k) != other.f(k)) return false;
    // Beyond the common prefix both tails are geometric or zero; equal values
    // at depth and depth+1 pin the ratio.
    return f(depth) == other.f(depth) && f(depth + 1) == other.f(depth + 1);
}

RoundStrategy::RoundStrategy(const Rat& gamma_, std::vector<Rat> shirk, std::vector<Rat> found,
                             std::vector<Rat> empty)
    : gamma(gamma_),
      shirk_report(std::move(shirk)),
      found_report(std::move(found)),
      empty_report(std::move(empty)) {
    require_probability(gamma, "work probability gamma");
    require_distribution(shirk_report, "shirk report");
    require_distribution(found_report, "found report");
    require_distribution(empty_report, "empty report");
    if (found_report.size() != shirk_report.size() || empty_report.size() != shirk_report.size())
        throw std::invalid_argument("report distributions disagree on message count");
}

std::optional<SurvivalBelief> update_survival(const SurvivalBelief& belief,
                                              const RoundStrategy& strat, std::size_t message,
                                              const Rat& lambda) {
    if (message >= strat.message_count()) throw std::invalid_argument("message id out of range");
    if (lambda <= 0 || lambda > 1) throw std::invalid_argument("lambda must lie in (0,1]");

    const Rat f1 = belief.f(1);
    const Rat alpha = (1 - strat.gamma) * strat.shirk_report[message];
    const Rat untouched = alpha + strat.gamma * (1 - lambda) * strat.empty_report[message];
    const Rat denom = alpha +
                      strat.gamma * ((1 - f1) + f1 * (1 - lambda)) * strat.empty_report[message] +
                      strat.gamma * lambda * f1 * strat.found_report[message];
    if (denom == 0) return std::nullopt;

    const Rat consumed = strat.gamma * lambda * strat.found_report[message];
    std::vector<Rat> f;
    f.reserve(belief.stored());
    for (std::size_t k = 1; k <= belief.stored(); ++k)
        f.push_back((belief.f(k) * untouched + belief.f(k + 1) * consumed) / denom);

    // The tail ratio survives the update: beyond the stored prefix both f(k)
    // and f(k+1) scale by the same factor.
    if (belief.tail_rho()) return SurvivalBelief::with_tail(std::move(f), *belief.tail_rho());
    return SurvivalBelief::truncated(std::move(f));
}

StateBelief update_state_belief(const StateBelief& prior, State observed, const Rat& pi) {
    if (pi <= ratio(1, 2) || pi >= 1)
        throw std::invalid_argument("precision pi must lie strictly in (1/2,1)");
    const Rat like_h = observed == State::H ? pi : 1 - pi;
    const Rat like_l = observed == State::H ? 1 - pi : pi;
    const Rat denom = prior.p * like_h + (1 - prior.p) * like_l;
    return StateBelief(prior.p * like_h / denom);
}

StateBelief posterior_after_counts(const StateBelief& prior, std::size_t n_h, std::size_t n_l,
                                   const Rat& pi) {
    if (pi <= ratio(1, 2) || pi >= 1)
        throw std::invalid_argument("precision pi must lie strictly in (1/2,1)");
    if (prior.p == 0 || prior.p == 1) return prior;
    const long net = static_cast<long>(n_h) - static_cast<long>(n_l);
    const Rat odds = prior.p / (1 - prior.p) * rat_pow(pi / (1 - pi), net);
    return StateBelief(odds / (1 + odds));
}

}  // namespace attrition
