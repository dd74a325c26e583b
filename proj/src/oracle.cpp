#include "attrition/oracle.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace attrition {

namespace {

using Counts = std::vector<Rat>;  // belief over the remaining signal count

Rat survival_of(const Counts& b, std::size_t k) {
    Rat s = 0;
    for (std::size_t r = k; r < b.size(); ++r) s += b[r];
    return s;
}

Counts point_mass_counts(std::size_t atom, std::size_t kmax) {
    Counts b(kmax + 1, Rat(0));
    b[std::min(atom, kmax)] = 1;
    return b;
}

std::vector<Rat> point_mass_dist(std::size_t id, std::size_t m) {
    std::vector<Rat> d(m, Rat(0));
    d[id] = 1;
    return d;
}

// Joint mass of (message m, r signals remain afterwards) under one round of
// the strategy, starting from belief b. Summing over r gives P(m).
Rat joint_mass(const Counts& b, const RoundStrategy& s, const Rat& lambda, std::size_t m,
               std::size_t r) {
    Rat mass = (1 - s.gamma) * s.shirk_report[m] * b[r];
    if (r + 1 < b.size()) mass += s.gamma * lambda * s.found_report[m] * b[r + 1];
    const Rat stay = (r >= 1) ? (1 - lambda) : Rat(1);
    mass += s.gamma * stay * s.empty_report[m] * b[r];
    return mass;
}

Rat message_prob(const Counts& b, const RoundStrategy& s, const Rat& lambda, std::size_t m) {
    Rat p = 0;
    for (std::size_t r = 0; r < b.size(); ++r) p += joint_mass(b, s, lambda, m, r);
    return p;
}

// Posterior counts given message m; nullopt when P(m) = 0.
std::optional<Counts> posterior_counts(const Counts& b, const RoundStrategy& s, const Rat& lambda,
                                       std::size_t m) {
    Counts post(b.size(), Rat(0));
    Rat total = 0;
    for (std::size_t r = 0; r < b.size(); ++r) {
        post[r] = joint_mass(b, s, lambda, m, r);
        total += post[r];
    }
    if (total == 0) return std::nullopt;
    for (Rat& x : post) x /= total;
    return post;
}

// Expected table value of `target` from the start of round j, given the
// history so far and the current belief over remaining counts. Effort costs
// are accounted separately.
Rat cont_value(const FiniteGame& game, const OracleProfile& profile, std::size_t target,
               std::size_t j, std::vector<std::size_t>& history, const Counts& b) {
    if (j == game.horizon) return game.tables[target].value(history);
    const RoundStrategy& s = profile.at(j, history);
    Rat total = 0;
    for (std::size_t m = 0; m < game.message_count; ++m) {
        Counts post(b.size(), Rat(0));
        Rat pm = 0;
        for (std::size_t r = 0; r < b.size(); ++r) {
            post[r] = joint_mass(b, s, game.lambda, m, r);
            pm += post[r];
        }
        if (pm == 0) continue;
        for (Rat& x : post) x /= pm;
        history.push_back(m);
        total += pm * cont_value(game, profile, target, j + 1, history, post);
        history.pop_back();
    }
    return total;
}

// Work/shirk branch beliefs at one round.
struct BranchBeliefs {
    Rat find_mass;    // lambda * F(1)
    Counts find;      // valid when find_mass > 0
    Rat nofind_mass;  // 1 - lambda * F(1)
    Counts nofind;    // valid when nofind_mass > 0
};

BranchBeliefs branch_beliefs(const Counts& b, const Rat& lambda) {
    BranchBeliefs out;
    const Rat f1 = survival_of(b, 1);
    out.find_mass = lambda * f1;
    out.nofind_mass = 1 - out.find_mass;
    if (out.find_mass > 0) {
        out.find.assign(b.size(), Rat(0));
        for (std::size_t r = 1; r < b.size(); ++r) out.find[r - 1] = b[r] / f1;
    }
    if (out.nofind_mass > 0) {
        out.nofind.assign(b.size(), Rat(0));
        for (std::size_t r = 0; r < b.size(); ++r) {
            const Rat stay = (r >= 1) ? (1 - lambda) : Rat(1);
            out.nofind[r] = b[r] * stay / out.nofind_mass;
        }
    }
    return out;
}

struct GapResult {
    Rat gap;      // best pure alternative minus current value
    Rat current;  // value of the prescribed round strategy
};

// One-shot deviation gap for the agent acting at (j, history) with belief b.
GapResult one_shot_gap(const FiniteGame& game, const OracleProfile& profile, std::size_t j,
                       std::vector<std::size_t>& history, const Counts& b) {
    const RoundStrategy& s = profile.at(j, history);
    const std::size_t M = game.message_count;

    std::vector<Rat> v_shirk(M), v_find(M, Rat(0)), v_nofind(M, Rat(0));
    const BranchBeliefs bb = branch_beliefs(b, game.lambda);
    for (std::size_t m = 0; m < M; ++m) {
        history.push_back(m);
        v_shirk[m] = cont_value(game, profile, j, j + 1, history, b);
        if (bb.find_mass > 0) v_find[m] = cont_value(game, profile, j, j + 1, history, bb.find);
        if (bb.nofind_mass > 0)
            v_nofind[m] = cont_value(game, profile, j, j + 1, history, bb.nofind);
        history.pop_back();
    }

    auto dot = [&](const std::vector<Rat>& w, const std::vector<Rat>& v) {
        Rat t = 0;
        for (std::size_t m = 0; m < M; ++m) t += w[m] * v[m];
        return t;
    };
    GapResult out;
    out.current = (1 - s.gamma) * dot(s.shirk_report, v_shirk) +
                  s.gamma * (bb.find_mass * dot(s.found_report, v_find) +
                             bb.nofind_mass * dot(s.empty_report, v_nofind) - game.c);

    const Rat best_shirk = *std::max_element(v_shirk.begin(), v_shirk.end());
    const Rat best_work = bb.find_mass * *std::max_element(v_find.begin(), v_find.end()) +
                          bb.nofind_mass * *std::max_element(v_nofind.begin(), v_nofind.end()) -
                          game.c;
    out.gap = std::max(best_shirk, best_work) - out.current;
    return out;
}

struct HistoryNode {
    std::size_t agent;
    std::vector<std::size_t> history;
    Rat reach;                    // probability under the profile
    std::optional<Counts> counts; // Bayesian belief; nullopt once off-path
};

void collect_histories(const FiniteGame& game, const OracleProfile& profile, std::size_t j,
                       std::vector<std::size_t>& history, const Rat& reach,
                       const std::optional<Counts>& counts, std::vector<HistoryNode>& out) {
    if (j == game.horizon) return;
    out.push_back({j, history, reach, counts});
    const RoundStrategy& s = profile.at(j, history);
    for (std::size_t m = 0; m < game.message_count; ++m) {
        Rat pm = 0;
        std::optional<Counts> post;
        if (counts.has_value()) {
            pm = message_prob(*counts, s, game.lambda, m);
            if (pm > 0) post = posterior_counts(*counts, s, game.lambda, m);
        }
        history.push_back(m);
        collect_histories(game, profile, j + 1, history, reach * pm, post, out);
        history.pop_back();
    }
}

std::vector<HistoryNode> all_histories(const FiniteGame& game, const OracleProfile& profile) {
    std::vector<HistoryNode> out;
    std::vector<std::size_t> scratch;
    collect_histories(game, profile, 0, scratch, Rat(1), Counts(game.supply.weights()), out);
    return out;
}

std::string history_label(const std::vector<std::size_t>& h) {
    if (h.empty()) return "(root)";
    std::string s;
    for (std::size_t m : h) s += static_cast<char>('0' + m);
    return s;
}

// True when some round at or below (j, history) is reached with positive
// probability and works with positive probability.
bool informative_after(const FiniteGame& game, const OracleProfile& profile, std::size_t j,
                       std::vector<std::size_t>& history, const Counts& b) {
    if (j == game.horizon) return false;
    const RoundStrategy& s = profile.at(j, history);
    if (s.gamma > 0) return true;
    for (std::size_t m = 0; m < game.message_count; ++m) {
        const Rat pm = message_prob(b, s, game.lambda, m);
        if (pm == 0) continue;
        const auto post = posterior_counts(b, s, game.lambda, m);
        history.push_back(m);
        const bool found = informative_after(game, profile, j + 1, history, *post);
        history.pop_back();
        if (found) return true;
    }
    return false;
}

}  // namespace

PayTable::PayTable(std::size_t horizon, std::size_t message_count, std::vector<Rat> values)
    : horizon_(horizon), message_count_(message_count), values_(std::move(values)) {
    if (horizon_ == 0) throw std::invalid_argument("PayTable: empty horizon");
    if (message_count_ < 2) throw std::invalid_argument("PayTable: need at least two messages");
    std::size_t expect = 1;
    for (std::size_t i = 0; i < horizon_; ++i) expect *= message_count_;
    if (values_.size() != expect)
        throw std::invalid_argument("PayTable: need one value per message tuple");
}

const Rat& PayTable::value(const std::vector<std::size_t>& messages) const {
    if (messages.size() != horizon_) throw std::invalid_argument("PayTable: tuple length mismatch");
    std::size_t code = 0;
    for (std::size_t m : messages) {
        if (m >= message_count_) throw std::invalid_argument("PayTable: message id out of range");
        code = code * message_count_ + m;
    }
    return values_[code];
}

FiniteGame::FiniteGame(std::size_t horizon_, std::size_t message_count_, SupplySpec supply_,
                       const Rat& lambda_, const Rat& c_, const Rat& reward_cap_,
                       const Rat& punish_cap_, std::vector<PayTable> tables_)
    : horizon(horizon_),
      message_count(message_count_),
      supply(std::move(supply_)),
      lambda(lambda_),
      c(c_),
      reward_cap(reward_cap_),
      punish_cap(punish_cap_),
      tables(std::move(tables_)) {
    if (horizon < 1 || horizon > 4) throw std::invalid_argument("FiniteGame: horizon must be 1..4");
    if (message_count < 2 || message_count > 4)
        throw std::invalid_argument("FiniteGame: message count must be 2..4");
    if (!supply.bounded()) throw std::invalid_argument("FiniteGame: supply must be a bounded pmf");
    if (supply.kmax() > 4) throw std::invalid_argument("FiniteGame: supply support must stay <= 4");
    if (lambda <= 0 || lambda > 1) throw std::invalid_argument("FiniteGame: lambda in (0,1]");
    if (c < 0) throw std::invalid_argument("FiniteGame: c must be nonnegative");
    if (reward_cap < 0 || punish_cap < 0)
        throw std::invalid_argument("FiniteGame: payoff caps must be nonnegative");
    if (tables.size() != horizon)
        throw std::invalid_argument("FiniteGame: need one payoff table per agent");
    for (const PayTable& t : tables) {
        for (const Rat& v : t.flat()) {
            if (v < -punish_cap || v > reward_cap)
                throw std::invalid_argument("FiniteGame: table value outside [-P, R]");
        }
    }
}

OracleProfile::OracleProfile(std::size_t horizon, std::size_t message_count)
    : message_count_(message_count) {
    if (horizon == 0) throw std::invalid_argument("OracleProfile: empty horizon");
    if (message_count < 2) throw std::invalid_argument("OracleProfile: need two messages");
    const RoundStrategy idle(Rat(0), point_mass_dist(0, message_count),
                             point_mass_dist(0, message_count), point_mass_dist(0, message_count));
    std::size_t histories = 1;
    for (std::size_t i = 0; i < horizon; ++i) {
        strategies_.emplace_back(histories, idle);
        histories *= message_count;
    }
}

std::size_t OracleProfile::code(std::size_t agent, const std::vector<std::size_t>& history) const {
    if (agent >= strategies_.size()) throw std::invalid_argument("OracleProfile: bad agent");
    if (history.size() != agent)
        throw std::invalid_argument("OracleProfile: history length must equal agent index");
    std::size_t c = 0;
    for (std::size_t m : history) {
        if (m >= message_count_) throw std::invalid_argument("OracleProfile: bad message id");
        c = c * message_count_ + m;
    }
    return c;
}

RoundStrategy& OracleProfile::at(std::size_t agent, const std::vector<std::size_t>& history) {
    return strategies_[agent][code(agent, history)];
}

const RoundStrategy& OracleProfile::at(std::size_t agent,
                                       const std::vector<std::size_t>& history) const {
    return strategies_[agent][code(agent, history)];
}

bool OracleProfile::operator==(const OracleProfile& other) const {
    if (message_count_ != other.message_count_ || strategies_.size() != other.strategies_.size())
        return false;
    for (std::size_t i = 0; i < strategies_.size(); ++i) {
        for (std::size_t h = 0; h < strategies_[i].size(); ++h) {
            const RoundStrategy& a = strategies_[i][h];
            const RoundStrategy& b = other.strategies_[i][h];
            if (a.gamma != b.gamma || a.shirk_report != b.shirk_report ||
                a.found_report != b.found_report || a.empty_report != b.empty_report)
                return false;
        }
    }
    return true;
}

namespace {
bool is_point_mass(const std::vector<Rat>& d) {
    for (const Rat& x : d)
        if (x != 0 && x != 1) return false;
    return true;
}
}  // namespace

bool OracleProfile::pure() const {
    for (const auto& level : strategies_) {
        for (const RoundStrategy& s : level) {
            if (s.gamma == 0) {
                if (!is_point_mass(s.shirk_report)) return false;
            } else if (s.gamma == 1) {
                if (!is_point_mass(s.found_report) || !is_point_mass(s.empty_report)) return false;
            } else {
                return false;
            }
        }
    }
    return true;
}

bool OracleProfile::anywhere_working() const {
    for (const auto& level : strategies_)
        for (const RoundStrategy& s : level)
            if (s.gamma > 0) return true;
    return false;
}

Rat expected_payoff(const FiniteGame& game, const OracleProfile& profile, std::size_t agent) {
    if (agent >= game.horizon) throw std::invalid_argument("expected_payoff: bad agent index");
    std::vector<std::size_t> scratch;
    Counts prior = game.supply.weights();
    const Rat gross = cont_value(game, profile, agent, 0, scratch, prior);
    Rat work_prob = 0;
    for (const HistoryNode& node : all_histories(game, profile)) {
        if (node.agent == agent && node.reach > 0)
            work_prob += node.reach * profile.at(node.agent, node.history).gamma;
    }
    return gross - game.c * work_prob;
}

DominanceReport dominance_scan(const FiniteGame& game) {
    // Continuation with everyone shirking and reporting uniformly; any other
    // shirk continuation gives the same margins because the branch values of
    // working and shirking coincide message by message.
    OracleProfile shirkers(game.horizon, game.message_count);
    const std::vector<Rat> uniform(game.message_count,
                                   Rat(1) / Rat(static_cast<long>(game.message_count)));
    std::vector<std::size_t> scratch;
    for (const HistoryNode& node : all_histories(game, shirkers)) {
        RoundStrategy& s = shirkers.at(node.agent, node.history);
        s.shirk_report = uniform;
    }

    DominanceReport report;
    report.agent_margin.assign(game.horizon, Rat(0));
    std::vector<bool> seen(game.horizon, false);
    bool first_global = true;
    Counts prior = game.supply.weights();
    const Rat fp = game.lambda * survival_of(prior, 1);

    for (const HistoryNode& node : all_histories(game, shirkers)) {
        const std::size_t j = node.agent;
        std::vector<std::size_t> h = node.history;
        std::vector<Rat> v(game.message_count);
        for (std::size_t m = 0; m < game.message_count; ++m) {
            h.push_back(m);
            v[m] = cont_value(game, shirkers, j, j + 1, h, prior);
            h.pop_back();
        }
        // The best working strategy reports the argmax message on both
        // branches, so its gross value matches the best shirk message and the
        // whole effort cost is the margin.
        const Rat best_shirk = *std::max_element(v.begin(), v.end());
        const Rat best_work = fp * best_shirk + (1 - fp) * best_shirk - game.c;
        const Rat margin = best_shirk - best_work;
        if (first_global || margin < report.min_margin) report.min_margin = margin;
        first_global = false;
        if (!seen[j] || margin < report.agent_margin[j]) report.agent_margin[j] = margin;
        seen[j] = true;
    }
    report.certified = report.min_margin > 0;
    return report;
}

std::string OffPath::describe() const {
    if (kind == Kind::PriorCarryForward) return "prior-carry-forward";
    return "point-mass-" + std::to_string(atom);
}

std::vector<OffPath> off_path_family(const FiniteGame& game) {
    std::vector<OffPath> family;
    family.push_back({OffPath::Kind::PriorCarryForward, 0});
    family.push_back({OffPath::Kind::PointMass, 0});  // deviator-worst member
    const auto& w = game.supply.weights();
    for (std::size_t r = 1; r < w.size(); ++r) {
        if (w[r] > 0) family.push_back({OffPath::Kind::PointMass, r});
    }
    return family;
}

EquilibriumCheck check_equilibrium(const FiniteGame& game, const OracleProfile& profile,
                                   const Rat& tolerance) {
    EquilibriumCheck result;
    std::vector<HistoryNode> nodes = all_histories(game, profile);

    Rat on_gap = 0;
    std::vector<std::string> on_failures;
    std::vector<const HistoryNode*> off_nodes;
    for (const HistoryNode& node : nodes) {
        if (node.reach > 0) {
            std::vector<std::size_t> h = node.history;
            const GapResult g = one_shot_gap(game, profile, node.agent, h, *node.counts);
            if (g.gap > on_gap) on_gap = g.gap;
            if (g.gap > tolerance)
                on_failures.push_back("agent " + std::to_string(node.agent) + " at history " +
                                      history_label(node.history) + ": gap " + to_string(g.gap));
            if (profile.at(node.agent, node.history).gamma > 0) result.informative = true;
        } else {
            off_nodes.push_back(&node);
        }
    }

    if (off_nodes.empty()) {
        result.worst_gap = on_gap;
        result.is_equilibrium = on_gap <= tolerance;
        result.failures = std::move(on_failures);
        return result;
    }

    bool have_best = false;
    Rat best_total;
    std::vector<std::string> best_failures;
    for (const OffPath& member : off_path_family(game)) {
        Rat off_gap = 0;
        std::vector<std::string> failures = on_failures;
        const Counts belief = member.kind == OffPath::Kind::PriorCarryForward
                                  ? Counts(game.supply.weights())
                                  : point_mass_counts(member.atom, game.supply.kmax());
        for (const HistoryNode* node : off_nodes) {
            std::vector<std::size_t> h = node->history;
            const GapResult g = one_shot_gap(game, profile, node->agent, h, belief);
            if (g.gap > off_gap) off_gap = g.gap;
            if (g.gap > tolerance)
                failures.push_back("agent " + std::to_string(node->agent) +
                                   " at unreached history " + history_label(node->history) +
                                   " under " + member.describe() + ": gap " + to_string(g.gap));
        }
        const Rat total = std::max(on_gap, off_gap);
        if (total <= tolerance) {
            result.worst_gap = total;
            result.is_equilibrium = true;
            result.supporting = member;
            return result;
        }
        if (!have_best || total < best_total) {
            have_best = true;
            best_total = total;
            best_failures = std::move(failures);
        }
    }
    result.worst_gap = best_total;
    result.is_equilibrium = false;
    result.failures = std::move(best_failures);
    return result;
}

namespace {

void grid_distributions(std::size_t slots, std::size_t q, std::vector<std::size_t>& cur,
                        std::size_t left, std::vector<std::vector<Rat>>& out) {
    if (cur.size() + 1 == slots) {
        std::vector<Rat> d;
        d.reserve(slots);
        for (std::size_t g : cur) d.push_back(ratio(static_cast<long>(g), static_cast<long>(q)));
        d.push_back(ratio(static_cast<long>(left), static_cast<long>(q)));
        out.push_back(std::move(d));
        return;
    }
    for (std::size_t g = 0; g <= left; ++g) {
        cur.push_back(g);
        grid_distributions(slots, q, cur, left - g, out);
        cur.pop_back();
    }
}

std::vector<RoundStrategy> candidate_strategies(const FiniteGame& game, std::size_t q) {
    std::vector<std::vector<Rat>> dists;
    std::vector<std::size_t> scratch;
    grid_distributions(game.message_count, q, scratch, q, dists);
    const std::vector<Rat> canon = point_mass_dist(0, game.message_count);

    std::vector<RoundStrategy> out;
    for (std::size_t g = 0; g <= q; ++g) {
        const Rat gamma = ratio(static_cast<long>(g), static_cast<long>(q));
        // A round working with probability gamma loses at least gamma*c to
        // the best shirk message, so it can only survive certification when
        // gamma*c is within the mixed tolerance.
        if (gamma * game.c > kMixedTolerance) continue;
        if (g == 0) {
            for (const auto& d : dists) out.emplace_back(Rat(0), d, canon, canon);
        } else if (g == q) {
            for (const auto& df : dists)
                for (const auto& de : dists) out.emplace_back(Rat(1), canon, df, de);
        } else {
            for (const auto& ds : dists)
                for (const auto& df : dists)
                    for (const auto& de : dists) out.emplace_back(gamma, ds, df, de);
        }
    }
    return out;
}

struct Slot {
    std::size_t agent;
    std::vector<std::size_t> history;
};

void enumerate_rec(const FiniteGame& game, const std::vector<Slot>& slots,
                   const std::vector<RoundStrategy>& candidates, std::size_t depth,
                   OracleProfile& profile, EnumerationResult& result) {
    if (depth == slots.size()) {
        ++result.profiles_checked;
        const Rat tol = profile.pure() ? Rat(0) : kMixedTolerance;
        EquilibriumCheck check = check_equilibrium(game, profile, tol);
        if (check.is_equilibrium) {
            EquilibriumCertificate cert{profile, check.worst_gap, check.informative,
                                        check.supporting};
            if (check.informative) result.any_informative = true;
            result.certificates.push_back(std::move(cert));
        }
        return;
    }
    for (const RoundStrategy& s : candidates) {
        profile.at(slots[depth].agent, slots[depth].history) = s;
        enumerate_rec(game, slots, candidates, depth + 1, profile, result);
    }
}

}  // namespace

EnumerationResult enumerate_equilibria(const FiniteGame& game, const Rat& step) {
    if (game.horizon > 3)
        throw std::invalid_argument("enumerate_equilibria: horizon must stay <= 3");
    if (game.message_count > 3)
        throw std::invalid_argument("enumerate_equilibria: message count must stay <= 3");
    if (step <= 0 || step > 1) throw std::invalid_argument("enumerate_equilibria: bad step");
    const Rat inv = 1 / step;
    if (inv.get_den() != 1 || inv > 8)
        throw std::invalid_argument("enumerate_equilibria: step must be 1/q with q <= 8");
    const std::size_t q = static_cast<std::size_t>(inv.get_num().get_ui());

    const std::vector<RoundStrategy> candidates = candidate_strategies(game, q);

    std::vector<Slot> slots;
    {
        OracleProfile skeleton(game.horizon, game.message_count);
        for (const HistoryNode& node : all_histories(game, skeleton))
            slots.push_back({node.agent, node.history});
    }

    double total = 1;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        total *= static_cast<double>(candidates.size());
        if (total > static_cast<double>(kEnumerationCap))
            throw std::invalid_argument(
                "enumerate_equilibria: " + std::to_string(candidates.size()) + "^" +
                std::to_string(slots.size()) +
                " candidate profiles exceed the enumeration cap; coarsen the step or shrink the game");
    }

    EnumerationResult result;
    OracleProfile profile(game.horizon, game.message_count);
    enumerate_rec(game, slots, candidates, 0, profile, result);
    return result;
}

BoundReport bound_checks(const FiniteGame& game, const OracleProfile& profile) {
    BoundReport report;
    const std::size_t kmax = game.supply.kmax();
    const Rat W = game.reward_cap + game.punish_cap;

    for (const HistoryNode& node : all_histories(game, profile)) {
        if (node.reach == 0) continue;
        const Counts& b = *node.counts;
        const RoundStrategy& s = profile.at(node.agent, node.history);
        HistoryBounds entry;
        entry.agent = node.agent;
        entry.history = node.history;
        entry.reach = node.reach;

        // Message probabilities and posteriors at this node.
        std::vector<Rat> pm(game.message_count);
        std::vector<std::optional<Counts>> post(game.message_count);
        for (std::size_t m = 0; m < game.message_count; ++m) {
            pm[m] = message_prob(b, s, game.lambda, m);
            if (pm[m] > 0) post[m] = posterior_counts(b, s, game.lambda, m);
        }

        bool first = true;
        for (std::size_t k = 1; k <= kmax; ++k) {
            const Rat fk = survival_of(b, k);
            Rat expected = 0;
            for (std::size_t m = 0; m < game.message_count; ++m)
                if (pm[m] > 0) expected += pm[m] * survival_of(*post[m], k);
            const Rat slack = fk - expected;
            if (first || slack < entry.supermartingale_slack) entry.supermartingale_slack = slack;
            first = false;
        }
        entry.supermartingale_ok = entry.supermartingale_slack >= 0;

        if (game.lambda < 1) {
            const BranchBeliefs bb = branch_beliefs(b, game.lambda);
            if (bb.nofind_mass > 0) {
                std::vector<std::size_t> h = node.history;
                Rat vstar;
                std::vector<Rat> v_work(game.message_count);
                bool first_m = true;
                for (std::size_t m = 0; m < game.message_count; ++m) {
                    h.push_back(m);
                    const Rat vs = cont_value(game, profile, node.agent, node.agent + 1, h, b);
                    v_work[m] =
                        cont_value(game, profile, node.agent, node.agent + 1, h, bb.nofind);
                    h.pop_back();
                    if (first_m || vs > vstar) vstar = vs;
                    first_m = false;
                }
                const Rat allowance = vstar + b[0] * W / (1 - game.lambda);
                bool first_slack = true;
                for (std::size_t m = 0; m < game.message_count; ++m) {
                    const Rat slack = allowance - v_work[m];
                    if (first_slack || slack < *entry.empty_value_slack)
                        entry.empty_value_slack = slack;
                    first_slack = false;
                }
                entry.empty_value_ok = *entry.empty_value_slack >= 0;
            }
        }

        if (game.c > 0) {
            const Rat C = game.lambda == 1
                              ? Rat(2 * W / game.c)
                              : Rat(2 * W / (game.c * game.lambda * (1 - game.lambda)));
            const Rat beta = s.gamma * game.lambda * survival_of(b, 1);
            std::vector<bool> informative(game.message_count, false);
            for (std::size_t m = 0; m < game.message_count; ++m) {
                if (pm[m] == 0) continue;
                std::vector<std::size_t> h = node.history;
                h.push_back(m);
                informative[m] = informative_after(game, profile, node.agent + 1, h, *post[m]);
            }
            for (std::size_t k = 1; k <= kmax; ++k) {
                const Rat fk = survival_of(b, k);
                const Rat fk1 = survival_of(b, k + 1);
                if (fk <= C * fk1) continue;
                Rat drop = 0;
                for (std::size_t m = 0; m < game.message_count; ++m) {
                    if (pm[m] == 0 || !informative[m]) continue;
                    drop += pm[m] * (fk - survival_of(*post[m], k));
                }
                const Rat slack = C * drop - beta * (fk - C * fk1);
                if (!entry.discovery_slack || slack < *entry.discovery_slack)
                    entry.discovery_slack = slack;
            }
            if (entry.discovery_slack) entry.discovery_ok = *entry.discovery_slack >= 0;
        }

        if (!entry.supermartingale_ok || !entry.empty_value_ok || !entry.discovery_ok)
            report.all_hold = false;
        report.entries.push_back(std::move(entry));
    }
    return report;
}

}  // namespace attrition
