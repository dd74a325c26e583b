#include "attrition/designer.hpp"

#include <algorithm>
#include <stdexcept>

namespace attrition {

namespace {

void check_scheme_inputs(const BeliefGrid& grid, const ExitProbabilities& ep) {
    if (ep.grid_points != grid.points())
        throw std::invalid_argument("designer: exit probabilities were solved on a different grid");
}

// Expected value of a report evaluated on an arbitrary chain (the scheme's
// own chain for quoted values, a halted chain inside verify_ic).
Rat report_value_on(const ExitProbabilities& ep, const CompensationScheme& scheme, std::size_t k,
                    Report m, const Rat& p) {
    if (k < 1 || k > scheme.grid.n())
        throw std::out_of_range("report_value: interior index required");
    if (m == Report::High) {
        const Rat& next = scheme.grid.point(k + 1);
        const Rat top = pi_mixed(ep, p, next);
        const Rat bot = pi_mixed_bottom(ep, p, next);
        return top * scheme.reward_h[k] - bot * scheme.punishment;
    }
    const Rat& next = scheme.grid.point(k - 1);
    const Rat top = pi_mixed(ep, p, next);
    const Rat bot = pi_mixed_bottom(ep, p, next);
    return bot * scheme.reward_l[k] - top * scheme.punishment;
}

Rat up_step_probability(const BeliefGrid& grid, std::size_t k) {
    const Rat& q = grid.point(k);
    return q * grid.pi() + (1 - q) * (1 - grid.pi());
}

Rat work_payoff_on(const ExitProbabilities& ep, const CompensationScheme& scheme, std::size_t k,
                   WorkPayoffForm form) {
    const Rat z = up_step_probability(scheme.grid, k);
    const Rat up_posterior = scheme.grid.point(k + 1);
    const Rat down_posterior = scheme.grid.point(k - 1);
    Rat up = report_value_on(ep, scheme, k, Report::High, up_posterior);
    if (form == WorkPayoffForm::ReportAnchoredPunish) {
        // Re-anchor the punishment branch at the pre-report point.
        const Rat top_post = pi_mixed(ep, up_posterior, up_posterior);
        const Rat top_pre = pi_mixed(ep, scheme.grid.point(k), up_posterior);
        up = top_post * scheme.reward_h[k] - (1 - top_pre) * scheme.punishment;
    }
    const Rat down = report_value_on(ep, scheme, k, Report::Low, down_posterior);
    return z * up + (1 - z) * down;
}

Rat shirk_payoff_on(const ExitProbabilities& ep, const CompensationScheme& scheme, std::size_t k) {
    const Rat& here = scheme.grid.point(k);
    return std::max(report_value_on(ep, scheme, k, Report::High, here),
                    report_value_on(ep, scheme, k, Report::Low, here));
}

}  // namespace

CompensationScheme design_scheme(const BeliefGrid& grid, const ExitProbabilities& ep,
                                 const Rat& Q) {
    check_scheme_inputs(grid, ep);
    if (Q < 0) throw std::invalid_argument("design_scheme: punishment must be nonnegative");
    CompensationScheme scheme{grid, ep, Q, {}, {}};
    const std::size_t n = grid.n();
    scheme.reward_h.assign(n + 1, Rat(0));
    scheme.reward_l.assign(n + 1, Rat(0));
    for (std::size_t k = 1; k <= n; ++k) {
        const Rat u = pi_mixed(ep, grid.point(k), grid.point(k + 1));
        // u = 0 cannot occur from an interior start; u = 1 at k = n where the
        // upward report lands on the boundary and the reward is moot.
        scheme.reward_h[k] = (u == 0) ? Rat(0) : Q * (1 - u) / u;
        const Rat v = pi_mixed(ep, grid.point(k), grid.point(k - 1));
        scheme.reward_l[k] = (v == 1) ? Rat(0) : Q * v / (1 - v);
    }
    return scheme;
}

Rat report_value(const CompensationScheme& scheme, std::size_t k, Report m, const Rat& p) {
    return report_value_on(scheme.ep, scheme, k, m, p);
}

Rat work_payoff(const CompensationScheme& scheme, std::size_t k, WorkPayoffForm form) {
    if (k < 1 || k > scheme.grid.n())
        throw std::out_of_range("work_payoff: interior index required");
    return work_payoff_on(scheme.ep, scheme, k, form);
}

Rat shirk_payoff(const CompensationScheme& scheme, std::size_t k) {
    if (k < 1 || k > scheme.grid.n())
        throw std::out_of_range("shirk_payoff: interior index required");
    return shirk_payoff_on(scheme.ep, scheme, k);
}

MinimalQ minimal_q(const BeliefGrid& grid, const ExitProbabilities& ep, const Rat& c,
                   const Rat& lambda, const Rat& rho, const std::optional<PayoffBox>& box) {
    check_scheme_inputs(grid, ep);
    if (ep.kappa != 1)
        throw std::invalid_argument("minimal_q: pass the plain-walk exit probabilities");
    if (c < 0) throw std::invalid_argument("minimal_q: c must be nonnegative");
    if (lambda <= 0 || lambda > 1) throw std::invalid_argument("minimal_q: lambda in (0,1]");
    if (rho <= 0 || rho > 1) throw std::invalid_argument("minimal_q: rho in (0,1]");

    const std::size_t n = grid.n();
    const CompensationScheme unit = design_scheme(grid, ep, Rat(1));

    MinimalQ out;
    out.unit_margin.assign(n + 1, Rat(0));

    std::vector<Rat> exit_prob(n + 1, Rat(1));
    if (rho < 1) {
        // With interior halting the effort is wasted whenever the walk never
        // exits, thinning the incentive by the total exit probability.
        const ExitProbabilities halted = exit_probabilities_kappa(grid, lambda * rho);
        for (std::size_t k = 1; k <= n; ++k)
            exit_prob[k] = total_exit(halted, grid.point(k), grid.point(k));
    }

    out.q_star = 0;
    out.binding_k = 1;
    for (std::size_t k = 1; k <= n; ++k) {
        const Rat mu = work_payoff_on(ep, unit, k, WorkPayoffForm::ConsistentIndex) -
                       shirk_payoff_on(ep, unit, k);
        out.unit_margin[k] = mu;
        if (mu <= 0) {
            out.feasible = false;
            out.violation = "work cannot be made optimal at interior point " + std::to_string(k) +
                            ": nonpositive per-unit margin " + to_string(mu);
            return out;
        }
        const Rat need = c / (lambda * exit_prob[k] * mu);
        if (need > out.q_star) {
            out.q_star = need;
            out.binding_k = k;
        }
    }

    if (box.has_value()) {
        if (out.q_star > box->P) {
            out.feasible = false;
            out.violation = "required punishment " + to_string(out.q_star) +
                            " exceeds the cap " + to_string(box->P);
            return out;
        }
        const CompensationScheme at_star = design_scheme(grid, ep, out.q_star);
        for (std::size_t k = 1; k <= n; ++k) {
            const Rat big = std::max(at_star.reward_h[k], at_star.reward_l[k]);
            if (big > box->R) {
                out.feasible = false;
                out.violation = "required reward " + to_string(big) + " at interior point " +
                                std::to_string(k) + " exceeds the cap " + to_string(box->R);
                return out;
            }
        }
    }
    return out;
}

Rat IcReport::truthful_net(std::size_t k) const {
    if (k < 1 || k >= truthful.size())
        throw std::out_of_range("IcReport::truthful_net: interior index required");
    return truthful[k];
}

IcReport verify_ic(const CompensationScheme& scheme, const GameParams& params, const Rat& rho,
                   const std::optional<PayoffBox>& box) {
    if (rho <= 0 || rho > 1) throw std::invalid_argument("verify_ic: rho in (0,1]");
    const Rat kappa = params.lambda * rho;
    const bool silence_available = kappa < 1;

    // Quoted scheme values assume the plain walk; evaluate deviations on the
    // walk that actually runs, which halts at rate 1 - kappa per round.
    const ExitProbabilities chain =
        (kappa == 1) ? scheme.ep : exit_probabilities_kappa(scheme.grid, kappa);

    const std::size_t n = scheme.grid.n();
    IcReport report;
    report.truthful.assign(n + 1, Rat(0));

    struct MapCase {
        std::string name;
        int on_h;  // 0 = High, 1 = Low, 2 = silent
        int on_l;
    };
    std::vector<MapCase> maps = {{"work-truthful", 0, 1},
                                 {"work-flip", 1, 0},
                                 {"work-always-high", 0, 0},
                                 {"work-always-low", 1, 1}};
    if (silence_available) {
        maps.push_back({"work-silent-on-high", 2, 1});
        maps.push_back({"work-silent-on-low", 0, 2});
        maps.push_back({"work-always-silent", 2, 2});
    }

    for (std::size_t k = 1; k <= n; ++k) {
        const Rat z = up_step_probability(scheme.grid, k);
        const Rat post_h = scheme.grid.point(k + 1);
        const Rat post_l = scheme.grid.point(k - 1);

        auto branch_value = [&](int message, const Rat& posterior) -> Rat {
            if (message == 2) return Rat(0);
            return report_value_on(chain, scheme, k, message == 0 ? Report::High : Report::Low,
                                   posterior);
        };

        const Rat truthful_net =
            kappa * (z * branch_value(0, post_h) + (1 - z) * branch_value(1, post_l)) - params.c;
        report.truthful[k] = truthful_net;

        auto add = [&](const std::string& name, const Rat& value) {
            DeviationMargin m;
            m.k = k;
            m.deviation = name;
            m.value = value;
            m.margin = truthful_net - value;
            if (m.margin < 0) report.incentive_compatible = false;
            report.margins.push_back(std::move(m));
        };

        const Rat& here = scheme.grid.point(k);
        add("shirk-report-high", report_value_on(chain, scheme, k, Report::High, here));
        add("shirk-report-low", report_value_on(chain, scheme, k, Report::Low, here));
        if (silence_available) add("shirk-silent", Rat(0));

        for (const MapCase& mc : maps) {
            const Rat value =
                kappa * (z * branch_value(mc.on_h, post_h) + (1 - z) * branch_value(mc.on_l, post_l)) -
                params.c;
            add(mc.name, value);
        }
    }

    if (box.has_value()) {
        if (scheme.punishment > box->P) {
            report.box_violation = "punishment " + to_string(scheme.punishment) +
                                   " exceeds the cap " + to_string(box->P);
        } else {
            for (std::size_t k = 1; k <= n && !report.box_violation; ++k) {
                const Rat big = std::max(scheme.reward_h[k], scheme.reward_l[k]);
                if (big > box->R)
                    report.box_violation = "reward " + to_string(big) + " at interior point " +
                                           std::to_string(k) + " exceeds the cap " + to_string(box->R);
            }
        }
        if (report.box_violation) report.incentive_compatible = false;
    }
    return report;
}

}  // namespace attrition
