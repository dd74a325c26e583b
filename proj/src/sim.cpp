#include "attrition/sim.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

namespace attrition {

namespace {

constexpr std::size_t kHigh = 0, kLow = 1, kSilent = 2;

std::size_t message_id(SimMessage m) {
    switch (m) {
        case SimMessage::High: return kHigh;
        case SimMessage::Low: return kLow;
        case SimMessage::Silent: return kSilent;
    }
    return kSilent;
}

std::vector<Rat> point_mass(std::size_t id) {
    std::vector<Rat> d(3, Rat(0));
    d[id] = 1;
    return d;
}

// Projection of the profile onto one round of public behavior, used for the
// survival-belief update. A designed worker's discovered signal is High with
// probability z = p*pi + (1-p)*(1-pi) from the observer's seat.
RoundStrategy observer_strategy(const SimConfig& cfg, const Rat& p) {
    if (cfg.profile.kind == SimProfile::Kind::AllShirk) {
        return RoundStrategy(Rat(0), point_mass(message_id(cfg.profile.shirk_message)),
                             point_mass(kSilent), point_mass(kSilent));
    }
    const Rat z = p * cfg.model.pi + (1 - p) * (1 - cfg.model.pi);
    return RoundStrategy(Rat(1), point_mass(kSilent), {z, 1 - z, Rat(0)}, point_mass(kSilent));
}

bool tail_never_decays(const SupplySpec& spec) {
    return spec.kind() == SupplySpec::Kind::Unlimited ||
           (spec.kind() == SupplySpec::Kind::Geometric && spec.rho() == 1);
}

void settle_payments(const SimConfig& cfg, Transcript& t) {
    for (TranscriptRow& row : t.rows) {
        const std::size_t k = row.point_index;
        switch (row.message) {
            case SimMessage::High:
                if (t.terminal == Terminal::ExitTop)
                    row.payment = cfg.scheme.reward_h[k];
                else if (t.terminal == Terminal::ExitBottom)
                    row.payment = -cfg.scheme.punishment;
                else
                    row.payment = 0;
                break;
            case SimMessage::Low:
                if (t.terminal == Terminal::ExitBottom)
                    row.payment = cfg.scheme.reward_l[k];
                else if (t.terminal == Terminal::ExitTop)
                    row.payment = -cfg.scheme.punishment;
                else
                    row.payment = 0;
                break;
            case SimMessage::Silent:
                row.payment = 0;
                break;
        }
    }
}

struct DeviationPlan {
    const Deviation* dev = nullptr;
    std::size_t round = 0;
};

Transcript play(const SimConfig& cfg, Stream& stream, const DeviationPlan& plan) {
    if (cfg.scheme.grid.prior() != cfg.model.p0)
        throw std::invalid_argument("sim: the grid prior and the model prior disagree");
    if (cfg.horizon_cap == 0) throw std::invalid_argument("sim: horizon cap must be positive");

    const BeliefGrid& grid = cfg.scheme.grid;
    SignalSequence seq = sample_sequence(cfg.supply, cfg.model, stream.fork());

    Transcript t;
    t.omega = seq.omega();
    if (plan.dev != nullptr) t.deviation_round = plan.round;

    SurvivalBelief pub = SurvivalBelief::from_supply(cfg.supply);
    std::size_t idx = grid.prior_index();
    std::size_t used = 0;
    const bool alive_tail = tail_never_decays(cfg.supply);

    for (std::size_t round = 1; round <= cfg.horizon_cap; ++round) {
        TranscriptRow row;
        row.round = round;
        row.point_index = idx;
        row.p = grid.point(idx);
        row.f1 = pub.f(1);

        const bool deviating = plan.dev != nullptr && plan.round == round;
        bool works = cfg.profile.kind == SimProfile::Kind::Designed;
        if (deviating) works = plan.dev->kind == Deviation::Kind::WorkMap;

        // One luck draw per round regardless of the action keeps episodes
        // with and without a deviation aligned up to the deviation round.
        const bool luck = stream.bernoulli(cfg.params.lambda);

        if (works) {
            row.worked = true;
            if (luck && seq.has_signal(used + 1)) {
                const State sig = seq.signal(used + 1);
                ++used;
                row.discovery = sig;
            }
        }

        if (deviating) {
            if (plan.dev->kind == Deviation::Kind::Shirk) {
                row.message = plan.dev->shirk_message;
            } else if (row.discovery.has_value()) {
                row.message =
                    *row.discovery == State::H ? plan.dev->on_high : plan.dev->on_low;
            } else {
                row.message = SimMessage::Silent;
            }
        } else if (cfg.profile.kind == SimProfile::Kind::AllShirk) {
            row.message = cfg.profile.shirk_message;
        } else if (row.discovery.has_value()) {
            row.message = *row.discovery == State::H ? SimMessage::High : SimMessage::Low;
        } else {
            row.message = SimMessage::Silent;
        }

        const RoundStrategy proj = observer_strategy(cfg, row.p);
        if (auto next = update_survival(pub, proj, message_id(row.message), cfg.params.lambda)) {
            pub = *next;
        }
        // else: the observer saw a zero-probability message; belief carries over.

        t.rows.push_back(row);

        if (row.message == SimMessage::High) {
            ++idx;
        } else if (row.message == SimMessage::Low) {
            --idx;
        } else if (!alive_tail) {
            t.terminal = Terminal::Stopped;
            settle_payments(cfg, t);
            return t;
        }

        if (idx == 0) {
            t.terminal = Terminal::ExitBottom;
            settle_payments(cfg, t);
            return t;
        }
        if (idx == grid.n() + 1) {
            t.terminal = Terminal::ExitTop;
            settle_payments(cfg, t);
            return t;
        }
    }
    t.terminal = Terminal::Truncated;
    settle_payments(cfg, t);
    return t;
}

}  // namespace

Rat Transcript::total_payments() const {
    Rat sum = 0;
    for (const auto& row : rows) sum += row.payment;
    return sum;
}

Rat Transcript::total_net(const Rat& effort_cost) const {
    Rat sum = 0;
    for (const auto& row : rows) {
        sum += row.payment;
        if (row.worked) sum -= effort_cost;
    }
    return sum;
}

Transcript run_episode(const SimConfig& cfg, Stream& stream) {
    return play(cfg, stream, DeviationPlan{});
}

Transcript run_episode(const SimConfig& cfg, std::uint64_t seed, std::uint64_t episode_index) {
    Stream stream(seed, episode_index);
    return run_episode(cfg, stream);
}

DeviationOutcome deviation_episode(const SimConfig& cfg, const Deviation& dev, std::size_t round,
                                   Stream& stream) {
    if (round == 0) throw std::invalid_argument("deviation_episode: rounds are 1-based");
    if (cfg.profile.kind != SimProfile::Kind::Designed)
        throw std::invalid_argument("deviation_episode: deviations are from the designed profile");
    DeviationPlan plan{&dev, round};
    DeviationOutcome out;
    out.transcript = play(cfg, stream, plan);
    out.reached = out.transcript.rows.size() >= round;
    out.deviator_net = 0;
    if (out.reached) {
        const TranscriptRow& row = out.transcript.rows[round - 1];
        out.deviator_net = row.payment - (row.worked ? cfg.params.c : Rat(0));
    }
    return out;
}

Rat EpisodeStats::exit_top_share() const {
    return episodes == 0 ? Rat(0) : ratio(static_cast<long>(exit_top), 1) / static_cast<long>(episodes);
}

Rat EpisodeStats::mean_rounds() const {
    return episodes == 0 ? Rat(0)
                         : ratio(static_cast<long>(total_rounds), static_cast<long>(episodes));
}

Rat EpisodeStats::mean_net() const {
    return episodes == 0 ? Rat(0) : total_net / static_cast<long>(episodes);
}

namespace {

void absorb(EpisodeStats& stats, const SimConfig& cfg, const Transcript& t) {
    ++stats.episodes;
    switch (t.terminal) {
        case Terminal::ExitTop: ++stats.exit_top; break;
        case Terminal::ExitBottom: ++stats.exit_bottom; break;
        case Terminal::Stopped: ++stats.stopped; break;
        case Terminal::Truncated: ++stats.truncated; break;
    }
    if (t.omega == State::H) ++stats.omega_high;
    stats.total_rounds += t.rows.size();
    stats.total_net += t.total_net(cfg.params.c);
    const std::size_t size = cfg.scheme.grid.size();
    if (stats.per_point.size() < size) stats.per_point.resize(size);
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const TranscriptRow& row = t.rows[i];
        PointStats& ps = stats.per_point[row.point_index];
        ++ps.visits;
        if (row.worked) ++ps.worked;
        if (row.discovery.has_value()) {
            ++ps.discoveries;
            ++stats.total_discoveries;
        }
        ps.net_sum += row.payment - (row.worked ? cfg.params.c : Rat(0));
        Rat next_p = row.p;
        if (row.message == SimMessage::High)
            next_p = cfg.scheme.grid.point(row.point_index + 1);
        else if (row.message == SimMessage::Low)
            next_p = cfg.scheme.grid.point(row.point_index - 1);
        ps.drift_sum += next_p - row.p;
    }
}

void merge(EpisodeStats& into, const EpisodeStats& part) {
    into.episodes += part.episodes;
    into.exit_top += part.exit_top;
    into.exit_bottom += part.exit_bottom;
    into.stopped += part.stopped;
    into.truncated += part.truncated;
    into.total_rounds += part.total_rounds;
    into.total_discoveries += part.total_discoveries;
    into.omega_high += part.omega_high;
    into.total_net += part.total_net;
    if (into.per_point.size() < part.per_point.size()) into.per_point.resize(part.per_point.size());
    for (std::size_t i = 0; i < part.per_point.size(); ++i) {
        PointStats& a = into.per_point[i];
        const PointStats& b = part.per_point[i];
        a.visits += b.visits;
        a.worked += b.worked;
        a.discoveries += b.discoveries;
        a.net_sum += b.net_sum;
        a.drift_sum += b.drift_sum;
    }
}

template <typename Body>
void run_sharded(std::size_t episodes, unsigned jobs, Body&& body) {
    if (jobs <= 1 || episodes < 2) {
        body(0, episodes, 0);
        return;
    }
    const unsigned workers = static_cast<unsigned>(
        std::min<std::size_t>(jobs, episodes));
    std::vector<std::thread> threads;
    const std::size_t per = (episodes + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = static_cast<std::size_t>(w) * per;
        const std::size_t hi = std::min(episodes, lo + per);
        if (lo >= hi) break;
        threads.emplace_back([&body, lo, hi, w] { body(lo, hi, w); });
    }
    for (auto& th : threads) th.join();
}

}  // namespace

EpisodeStats monte_carlo(const SimConfig& cfg, std::size_t episodes, std::uint64_t seed,
                         unsigned jobs) {
    std::vector<EpisodeStats> parts(std::max(1u, jobs));
    run_sharded(episodes, jobs, [&](std::size_t lo, std::size_t hi, unsigned slot) {
        EpisodeStats local;
        for (std::size_t e = lo; e < hi; ++e) {
            Stream stream(seed, e);
            absorb(local, cfg, play(cfg, stream, DeviationPlan{}));
        }
        parts[slot] = std::move(local);
    });
    EpisodeStats total;
    for (const EpisodeStats& part : parts) merge(total, part);
    return total;
}

Rat DeviationStats::mean() const { return reached == 0 ? Rat(0) : net_sum / static_cast<long>(reached); }

double DeviationStats::standard_error() const {
    if (reached < 2) return 0.0;
    const double m = to_double(mean());
    const double n = static_cast<double>(reached);
    double var = (net_sq_sum - n * m * m) / (n - 1.0);
    if (var < 0) var = 0;
    return std::sqrt(var / n);
}

DeviationStats deviation_monte_carlo(const SimConfig& cfg, const Deviation& dev, std::size_t round,
                                     std::size_t episodes, std::uint64_t seed, unsigned jobs) {
    std::vector<DeviationStats> parts(std::max(1u, jobs));
    run_sharded(episodes, jobs, [&](std::size_t lo, std::size_t hi, unsigned slot) {
        DeviationStats local;
        for (std::size_t e = lo; e < hi; ++e) {
            Stream stream(seed, e);
            DeviationOutcome out = deviation_episode(cfg, dev, round, stream);
            ++local.episodes;
            if (out.reached) {
                ++local.reached;
                local.net_sum += out.deviator_net;
                const double v = to_double(out.deviator_net);
                local.net_sq_sum += v * v;
            }
        }
        parts[slot] = std::move(local);
    });
    DeviationStats total;
    for (const DeviationStats& part : parts) {
        total.episodes += part.episodes;
        total.reached += part.reached;
        total.net_sum += part.net_sum;
        total.net_sq_sum += part.net_sq_sum;
    }
    return total;
}

}  // namespace attrition
