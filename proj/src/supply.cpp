#include "attrition/supply.hpp"

#include <stdexcept>

namespace attrition {

SupplySpec SupplySpec::pmf(std::vector<Rat> weights) {
    if (weights.empty()) throw std::invalid_argument("pmf: empty weight vector");
    Rat total = 0;
    for (const Rat& w : weights) {
        if (w < 0) throw std::invalid_argument("pmf: negative weight");
        total += w;
    }
    if (total != 1) throw std::invalid_argument("pmf: weights sum to " + to_string(total) + ", expected 1");
    SupplySpec s;
    s.kind_ = Kind::Pmf;
    s.weights_ = std::move(weights);
    return s;
}

SupplySpec SupplySpec::geometric(const Rat& f1, const Rat& rho) {
    require_probability(f1, "geometric f1");
    if (rho <= 0 || rho > 1)
        throw std::invalid_argument("geometric rho must lie in (0,1], got " + to_string(rho));
    SupplySpec s;
    s.kind_ = Kind::Geometric;
    s.f1_ = f1;
    s.rho_ = rho;
    return s;
}

SupplySpec SupplySpec::unlimited() { return SupplySpec{}; }

Rat SupplySpec::survival(std::size_t k) const {
    if (k == 0) throw std::invalid_argument("survival is defined from k = 1");
    switch (kind_) {
        case Kind::Pmf: {
            Rat tail = 0;
            for (std::size_t j = k; j < weights_.size(); ++j) tail += weights_[j];
            return tail;
        }
        case Kind::Geometric:
            return rat_pow(rho_, static_cast<long>(k) - 1) * f1_;
        case Kind::Unlimited:
            return 1;
    }
    throw std::logic_error("unreachable");
}

Rat SupplySpec::mass(std::size_t k) const {
    switch (kind_) {
        case Kind::Pmf:
            return k < weights_.size() ? weights_[k] : Rat(0);
        case Kind::Geometric:
            if (rho_ == 1)
                throw std::invalid_argument("mass: geometric with rho = 1 has no finite pmf");
            if (k == 0) return 1 - f1_;
            return survival(k) - survival(k + 1);
        case Kind::Unlimited:
            throw std::invalid_argument("mass: unlimited supply has no pmf");
    }
    throw std::logic_error("unreachable");
}

std::size_t SupplySpec::kmax() const {
    if (kind_ != Kind::Pmf) throw std::invalid_argument("kmax: only explicit pmf specs are bounded");
    return weights_.size() - 1;
}

const std::vector<Rat>& SupplySpec::weights() const {
    if (kind_ != Kind::Pmf) throw std::invalid_argument("weights: not a pmf spec");
    return weights_;
}

const Rat& SupplySpec::f1() const {
    if (kind_ != Kind::Geometric) throw std::invalid_argument("f1: not a geometric spec");
    return f1_;
}

const Rat& SupplySpec::rho() const {
    if (kind_ != Kind::Geometric) throw std::invalid_argument("rho: not a geometric spec");
    return rho_;
}

SignalModel::SignalModel(const Rat& p0_, const Rat& pi_) : p0(p0_), pi(pi_) {
    require_probability(p0, "signal prior p0");
    if (pi <= ratio(1, 2) || pi >= 1)
        throw std::invalid_argument("signal precision pi must lie strictly in (1/2,1), got " + to_string(pi));
}

IhrReport check_ihr(const SupplySpec& spec, bool strict) {
    IhrReport report;
    // Hazard at k is Pr(count = k) / Pr(count >= k), scanned over the support.
    const auto scan = [&](auto hazard, std::size_t last) {
        bool have_prev = false;
        Rat prev;
        for (std::size_t k = 0; k <= last; ++k) {
            const Rat h = hazard(k);
            if (have_prev && (strict ? h <= prev : h < prev)) {
                report.holds = false;
                report.first_violation = k;
                return;
            }
            prev = h;
            have_prev = true;
        }
    };

    switch (spec.kind()) {
        case SupplySpec::Kind::Pmf: {
            // Stop at the last count with positive tail; hazards beyond it are undefined.
            std::size_t last = 0;
            for (std::size_t k = 0; k <= spec.kmax(); ++k)
                if (k == 0 ? true : spec.survival(k) > 0) last = k;
            scan(
                [&](std::size_t k) {
                    const Rat tail = k == 0 ? Rat(1) : spec.survival(k);
                    return Rat(spec.mass(k) / tail);
                },
                last);
            break;
        }
        case SupplySpec::Kind::Geometric: {
            if (spec.rho() == 1) {
                // Hazard is 1 - f1 at zero and 0 afterwards (all mass beyond
                // zero sits at infinity); nondecreasing only if f1 = 1.
                if (spec.f1() < 1 || strict) {
                    report.holds = false;
                    report.first_violation = 1;
                }
                break;
            }
            // Hazard is 1 - f1 at zero and the constant 1 - rho afterwards.
            if (spec.rho() > spec.f1()) {
                report.holds = false;
                report.first_violation = 1;
            } else if (strict) {
                report.holds = false;
                report.first_violation = spec.rho() < spec.f1() ? 2 : 1;
            }
            break;
        }
        case SupplySpec::Kind::Unlimited:
            break;  // hazard identically 0; holds vacuously
    }
    return report;
}

SignalSequence::SignalSequence(const SupplySpec& spec, const SignalModel& model, Stream stream)
    : spec_(spec), pi_(model.pi), stream_(stream) {
    omega_ = stream_.bernoulli(model.p0) ? State::H : State::L;
    if (spec_.kind() == SupplySpec::Kind::Pmf) {
        std::size_t count = stream_.pick(spec_.weights());
        known_count_ = count;
    } else if (spec_.kind() == SupplySpec::Kind::Unlimited) {
        infinite_ = true;
    } else {
        if (!stream_.bernoulli(spec_.f1()))
            known_count_ = 0;
        else if (spec_.rho() == 1)
            infinite_ = true;
        // rho < 1 with a first signal: the tail unfolds lazily in extend().
    }
}

State SignalSequence::draw_signal() {
    return stream_.bernoulli(pi_) ? omega_ : flip(omega_);
}

void SignalSequence::extend(std::size_t k) {
    while (signals_.size() < k) {
        if (known_count_ && signals_.size() >= *known_count_) return;
        if (!known_count_ && !infinite_ && !signals_.empty()) {
            // Geometric tail: the next signal exists with probability rho.
            if (!stream_.bernoulli(spec_.rho())) {
                known_count_ = signals_.size();
                return;
            }
        }
        signals_.push_back(draw_signal());
    }
}

bool SignalSequence::has_signal(std::size_t k) {
    if (k == 0) throw std::invalid_argument("signals are 1-based");
    extend(k);
    return signals_.size() >= k;
}

State SignalSequence::signal(std::size_t k) {
    if (!has_signal(k)) throw std::out_of_range("signal index beyond realized count");
    return signals_[k - 1];
}

std::optional<std::size_t> SignalSequence::count() {
    if (infinite_) return std::nullopt;
    while (!known_count_) extend(signals_.size() + 1);
    return known_count_;
}

SignalSequence sample_sequence(const SupplySpec& spec, const SignalModel& model, Stream stream) {
    return SignalSequence(spec, model, stream);
}

}  // namespace attrition
